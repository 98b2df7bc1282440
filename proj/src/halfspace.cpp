#include "prbm/halfspace.hpp"

#include <gsl/gsl_sf_erf.h>
#include <gsl/gsl_sf_gamma.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "prbm/error.hpp"

namespace prbm {

namespace {

const double kSqrtPi = std::sqrt(M_PI);

double harmonic_prefactor(int d) { return std::tgamma(d / 2.0) / std::pow(M_PI, d / 2.0); }

// 1/(sqrt(pi) u) - erfcx(u), accurate for all u > 0.
double erfcx_deficit(double u) {
    if (u < 10.0) return 1.0 / (kSqrtPi * u) - erfcx(u);
    // Asymptotic expansion; the leading terms cancel analytically.
    const double x = 1.0 / (2.0 * u * u);
    double term = x, sum = 0.0;
    for (int n = 1; n < 40; ++n) {
        sum += term;
        const double next = -term * (2 * n + 1) * x;
        if (std::abs(next) < 1e-17 * std::abs(sum)) break;
        term = next;
    }
    return sum / (kSqrtPi * u);
}

// int_0^inf u e^{-u} (sigma^2 + u^2)^{-d/2} du
double kernel_integral(double sigma, int d, const QuadratureConfig& cfg) {
    auto f = [sigma, d](double u) { return u * std::exp(-u) * std::pow(sigma * sigma + u * u, -0.5 * d); };
    const double knee = sigma + 1.0;
    const double head = integrate_with_breaks(f, {0.0, sigma, knee}, cfg).value;
    return head + integrate_to_infinity(f, knee, cfg).value;
}

}  // namespace

void TransportParams::validate() const {
    require(Lambda >= 0.0 && std::isfinite(Lambda), ErrorKind::InvalidParam, "Lambda must be >= 0");
    require(D > 0.0 && std::isfinite(D), ErrorKind::InvalidParam, "D must be > 0");
    require(C0 > 0.0 && std::isfinite(C0), ErrorKind::InvalidParam, "C0 must be > 0");
}

double erfcx(double u) {
    require(u >= 0.0, ErrorKind::InvalidParam, "erfcx defined here for u >= 0");
    if (u < 25.0) return std::exp(u * u) * std::erfc(u);
    return std::exp(gsl_sf_log_erfc(u) + u * u);
}

double stopping_time_density(double t, double Lambda) {
    require(t > 0.0, ErrorKind::InvalidParam, "t must be > 0");
    require(Lambda > 0.0, ErrorKind::InvalidParam, "Lambda must be > 0");
    const double ratio = t / (Lambda * Lambda);
    require(std::isfinite(ratio) && ratio > 0.0, ErrorKind::NumericOverflow,
            "t / Lambda^2 is not representable");
    const double u = std::sqrt(ratio / 2.0);
    return erfcx_deficit(u) / (2.0 * Lambda * Lambda);
}

double stopping_time_cdf(double t, double Lambda, const QuadratureConfig& cfg) {
    require(Lambda > 0.0, ErrorKind::InvalidParam, "Lambda must be > 0");
    if (t <= 0.0) return 0.0;
    // t = v^2 removes the t^{-1/2} singularity at the origin.
    auto f = [Lambda](double v) { return v > 0 ? 2.0 * v * stopping_time_density(v * v, Lambda) : 2.0 / (Lambda * std::sqrt(2.0 * M_PI)); };
    return integrate(f, 0.0, std::sqrt(t), cfg).value;
}

double spread_kernel_t(double s_norm, double Lambda, int d, const QuadratureConfig& cfg) {
    require(Lambda > 0.0, ErrorKind::InvalidParam, "Lambda must be > 0");
    require(d >= 2, ErrorKind::InvalidParam, "d must be >= 2");
    s_norm = std::abs(s_norm);
    if (s_norm == 0.0) return std::numeric_limits<double>::infinity();
    const double sigma = s_norm / Lambda;
    return harmonic_prefactor(d) * std::pow(Lambda, 1 - d) * kernel_integral(sigma, d, cfg);
}

double spread_kernel_t(const std::vector<double>& s, double Lambda, const QuadratureConfig& cfg) {
    double n2 = 0.0;
    for (double c : s) n2 += c * c;
    return spread_kernel_t(std::sqrt(n2), Lambda, static_cast<int>(s.size()) + 1, cfg);
}

double eta(double z, int d, const QuadratureConfig& cfg) {
    require(z > 0.0, ErrorKind::InvalidParam, "z must be > 0");
    require(d >= 2, ErrorKind::InvalidParam, "d must be >= 2");
    const double z2 = z * z;
    // Folding (1+z^2)^{d/2} into the integrand keeps it O(1) for large z.
    auto f = [z2, d](double t) { return t * std::exp(-t) * std::pow((1.0 + z2) / (t * t + z2), 0.5 * d); };
    const double knee = z + 1.0;
    return integrate_with_breaks(f, {0.0, z, knee}, cfg).value + integrate_to_infinity(f, knee, cfg).value;
}

double absorption_probability_disk(double r, double Lambda, int d, const QuadratureConfig& cfg) {
    require(r >= 0.0, ErrorKind::InvalidParam, "r must be >= 0");
    require(Lambda > 0.0, ErrorKind::InvalidParam, "Lambda must be > 0");
    require(d >= 2, ErrorKind::InvalidParam, "d must be >= 2");
    if (r == 0.0) return 0.0;
    const double rho = r / Lambda;
    const double a = 0.5 * (d - 1);
    // Exponential mixture over release heights of the flat-boundary harmonic
    // measure of a (d-1)-ball, which is a regularized incomplete beta.
    auto f = [rho, a](double t) {
        const double x = rho * rho / (rho * rho + t * t);
        return std::exp(-t) * gsl_sf_beta_inc(a, 0.5, x);
    };
    // The integrand has a kink near t = rho; beyond t ~ 40 it is below 1e-17.
    const double knee = 40.0;
    std::vector<double> breaks{0.0};
    if (rho < knee) breaks.push_back(rho);
    breaks.push_back(knee);
    const double v = integrate_with_breaks(f, breaks, cfg).value + integrate_to_infinity(f, knee, cfg).value;
    return std::clamp(v, 0.0, 1.0);
}

double harmonic_density_halfspace(const std::vector<double>& x, const std::vector<double>& s) {
    const int d = static_cast<int>(x.size());
    require(d >= 2 && static_cast<int>(s.size()) == d - 1, ErrorKind::InvalidParam,
            "x needs d >= 2 coordinates and s needs d-1");
    const double h = x[d - 1];
    require(h > 0.0, ErrorKind::InvalidParam, "x must lie strictly above the boundary");
    double r2 = h * h;
    for (int k = 0; k < d - 1; ++k) r2 += (x[k] - s[k]) * (x[k] - s[k]);
    return harmonic_prefactor(d) * h / std::pow(r2, 0.5 * d);
}

double spread_density_halfspace(const std::vector<double>& x, const std::vector<double>& s, double Lambda,
                                const SpreadDensityConfig& cfg) {
    require(x.size() == 2 && s.size() == 1, ErrorKind::InvalidParam, "spread density is implemented for d = 2");
    require(Lambda >= 0.0, ErrorKind::InvalidParam, "Lambda must be >= 0");
    const double y = x[1];
    require(y > 0.0, ErrorKind::InvalidParam, "x must lie strictly above the boundary");
    if (Lambda == 0.0) return harmonic_density_halfspace(x, s);
    require(y / Lambda >= cfg.min_height_ratio, ErrorKind::SlowConvergence,
            "x_d / Lambda = " + std::to_string(y / Lambda) + " is below the configured floor");
    const double delta = std::abs(s[0] - x[0]);
    auto f = [y, Lambda](double k) { return std::exp(-y * k) / (1.0 + Lambda * k) / M_PI; };
    QuadratureConfig q = cfg.quad;
    // Scale the absolute target to the size of the answer, which is at most 1/(pi y).
    if (q.abs_tol <= 0.0) q.abs_tol = q.rel_tol / (M_PI * y);
    if (delta == 0.0) return integrate_to_infinity(f, 0.0, q).value;
    return integrate_fourier_cos(f, delta, q).value;
}

}  // namespace prbm
