#pragma once

#include <vector>

#include "prbm/quadrature.hpp"

namespace prbm {

/// Physical parameters of the mixed boundary condition.
struct TransportParams {
    double Lambda = 0.0;  ///< D/W, a length
    double D = 1.0;
    double C0 = 1.0;

    void validate() const;
};

/// Density of the local-time threshold crossing time of the reflected walk
/// started on a flat boundary.
double stopping_time_density(double t, double Lambda);

/// Cumulative law of the same stopping time, by quadrature of the density.
double stopping_time_cdf(double t, double Lambda, const QuadratureConfig& cfg = {});

/// Boundary absorption density at lateral distance |s| from the release point
/// on a flat boundary. Returns +inf at s = 0.
double spread_kernel_t(double s_norm, double Lambda, int d, const QuadratureConfig& cfg = {});
double spread_kernel_t(const std::vector<double>& s, double Lambda, const QuadratureConfig& cfg = {});

/// Ratio between the absorption density at |s| = z Lambda and the harmonic
/// density seen from height Lambda.
double eta(double z, int d, const QuadratureConfig& cfg = {});

/// Probability that a walker released on a flat boundary is finally absorbed
/// within lateral distance r of its release point.
double absorption_probability_disk(double r, double Lambda, int d, const QuadratureConfig& cfg = {});

/// Harmonic measure density of the half-space {x_d > 0}. x has d entries,
/// s has d-1 entries.
double harmonic_density_halfspace(const std::vector<double>& x, const std::vector<double>& s);

/// Spread harmonic measure density of the half-plane, via its Fourier integral.
struct SpreadDensityConfig {
    QuadratureConfig quad{};
    double min_height_ratio = 1e-6;  ///< x_d / Lambda below this is rejected
};

double spread_density_halfspace(const std::vector<double>& x, const std::vector<double>& s, double Lambda,
                                const SpreadDensityConfig& cfg = {});

/// exp(u^2) erfc(u) for u >= 0.
double erfcx(double u);

}  // namespace prbm
