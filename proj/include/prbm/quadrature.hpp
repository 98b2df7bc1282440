#pragma once

#include <functional>
#include <vector>

namespace prbm {

struct QuadratureConfig {
    double rel_tol = 1e-9;
    double abs_tol = 0.0;
    int max_subdivisions = 2000;
    /// Upper limit used when a semi-infinite integral is truncated explicitly.
    double cutoff = 40.0;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod on [lo, hi] with endpoint-singularity extrapolation.
QuadratureResult integrate(const Integrand& f, double lo, double hi, const QuadratureConfig& cfg = {});

/// Same as integrate() with known interior break points (singularities, kinks).
QuadratureResult integrate_with_breaks(const Integrand& f, std::vector<double> points, const QuadratureConfig& cfg = {});

/// Integral over [lo, +inf).
QuadratureResult integrate_to_infinity(const Integrand& f, double lo, const QuadratureConfig& cfg = {});

/// Integral over (-inf, +inf).
QuadratureResult integrate_real_line(const Integrand& f, const QuadratureConfig& cfg = {});

/// Fourier cosine integral  int_0^inf f(k) cos(omega k) dk.
QuadratureResult integrate_fourier_cos(const Integrand& f, double omega, const QuadratureConfig& cfg = {});

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace prbm
