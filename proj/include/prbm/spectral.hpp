#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "prbm/quadrature.hpp"

namespace prbm {

struct SeriesConfig {
    int max_terms = 200000;
    double tail_tol = 1e-14;
};

enum class SpectrumKind { DiskInterior, DiskExterior, BallInterior, BallExterior, Annulus };

enum class BallSide { Interior, Exterior };

struct SpectralMode {
    int index = 0;
    double mu = 0.0;
    std::int64_t degeneracy = 1;
};

struct AnalyticSpectrum {
    SpectrumKind kind = SpectrumKind::DiskInterior;
    double outer_radius = 0.0;  // annulus only
    std::vector<SpectralMode> modes;

    /// Eigenvalues repeated according to degeneracy.
    std::vector<double> expanded() const;
};

double poisson_kernel_disk(double r, double theta);

double disk_spread_density(double r, double theta, double Lambda, const SeriesConfig& cfg = {});

/// Kernel of the disk spreading operator. Evaluated as an exponential average
/// of Poisson kernels, which sums the slowly convergent Fourier series exactly.
double disk_spreading_kernel(double theta, double theta_p, double Lambda, const QuadratureConfig& cfg = {});

/// The same kernel summed as a truncated Fourier series (slow; kept for checks).
double disk_spreading_kernel_series(double theta, double theta_p, double Lambda, int terms);

double ball_eigenvalue(int l, BallSide side);
std::int64_t ball_degeneracy(int l, int d);

/// Zonal series of the spread harmonic measure density of the unit ball.
double ball_spread_density(double r, double theta, double Lambda, const SeriesConfig& cfg = {});

/// Poisson kernel of the unit ball in three dimensions.
double poisson_kernel_ball(double r, double theta);

AnalyticSpectrum disk_spectrum(int alpha_max, bool exterior = false);
AnalyticSpectrum ball_spectrum(int l_max, BallSide side, int d = 3);
AnalyticSpectrum annulus_spectrum(double R, int alpha_max);

struct ImpedanceValue {
    double Z = 0.0;
    double Z_cell0 = 0.0;
    double Z_sp = 0.0;
};

/// Spectral impedance Z = (Lambda/D) sum F_a/(1+Lambda mu_a). When Z_cell0 is
/// given the spectroscopic part (1/Z - 1/Z_cell0)^{-1} is also filled in.
ImpedanceValue impedance_from_spectrum(const std::vector<double>& mu, const std::vector<double>& F, double Lambda,
                                       double D, std::optional<double> Z_cell0 = std::nullopt,
                                       bool want_spectroscopic = true);

double zeta(const std::vector<double>& mu, const std::vector<double>& F, double lambda);

/// Uniform-flux annulus quantities, per unit C0.
double annulus_cell_impedance0(double R, double D);

}  // namespace prbm
