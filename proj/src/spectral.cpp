#include "prbm/spectral.hpp"

#include <cmath>
#include <string>

#include "prbm/error.hpp"

namespace prbm {

namespace {

void check_radius(double r) {
    require(r >= 0.0 && r < 1.0, ErrorKind::InvalidParam, "r must lie in [0, 1)");
}

// Smallest N with bound(N) < tol, or TruncationTooCoarse.
template <class Bound>
int truncation(const SeriesConfig& cfg, Bound bound) {
    for (int n = 1; n <= cfg.max_terms; n *= 2) {
        if (bound(n) < cfg.tail_tol) {
            int lo = n / 2, hi = n;
            while (hi - lo > 1) {
                const int mid = (lo + hi) / 2;
                (bound(mid) < cfg.tail_tol ? hi : lo) = mid;
            }
            return hi;
        }
    }
    if (bound(cfg.max_terms) < cfg.tail_tol) return cfg.max_terms;
    fail(ErrorKind::TruncationTooCoarse,
         "series tail bound exceeds " + std::to_string(cfg.tail_tol) + " at " + std::to_string(cfg.max_terms) + " terms");
}

}  // namespace

std::vector<double> AnalyticSpectrum::expanded() const {
    std::vector<double> out;
    for (const auto& m : modes)
        for (std::int64_t k = 0; k < m.degeneracy; ++k) out.push_back(m.mu);
    return out;
}

double poisson_kernel_disk(double r, double theta) {
    check_radius(r);
    return (1.0 - r * r) / (2.0 * M_PI * (1.0 - 2.0 * r * std::cos(theta) + r * r));
}

double disk_spread_density(double r, double theta, double Lambda, const SeriesConfig& cfg) {
    check_radius(r);
    require(Lambda >= 0.0, ErrorKind::InvalidParam, "Lambda must be >= 0");
    if (r == 0.0) return 1.0 / (2.0 * M_PI);
    const int n = truncation(cfg, [r](int N) { return std::pow(r, N + 1) / ((1.0 - r) * M_PI); });
    double sum = 0.0, rp = 1.0;
    for (int a = 1; a <= n; ++a) {
        rp *= r;
        sum += rp * std::cos(a * theta) / (1.0 + Lambda * a);
    }
    return (1.0 + 2.0 * sum) / (2.0 * M_PI);
}

double disk_spreading_kernel(double theta, double theta_p, double Lambda, const QuadratureConfig& cfg) {
    require(Lambda > 0.0, ErrorKind::InvalidParam, "Lambda must be > 0");
    const double delta = std::remainder(theta - theta_p, 2.0 * M_PI);
    require(std::abs(delta) > 1e-12, ErrorKind::DiagonalSingularity, "kernel diverges on the diagonal");
    const double c = std::cos(delta);
    // 1/(1+Lambda a) = int_0^inf e^{-u} e^{-Lambda a u} du turns the series into
    // an average of Poisson kernels at radius e^{-Lambda u}.
    auto f = [Lambda, c](double u) {
        const double r = std::exp(-Lambda * u);
        const double one_minus_r2 = -std::expm1(-2.0 * Lambda * u);
        const double one_minus_r = -std::expm1(-Lambda * u);
        const double denom = one_minus_r * one_minus_r + 2.0 * r * (1.0 - c);
        return std::exp(-u) * one_minus_r2 / (2.0 * M_PI * denom);
    };
    const double knee = std::sqrt(2.0 * (1.0 - c)) / Lambda;
    return integrate_with_breaks(f, {0.0, knee, knee + 1.0}, cfg).value + integrate_to_infinity(f, knee + 1.0, cfg).value;
}

double disk_spreading_kernel_series(double theta, double theta_p, double Lambda, int terms) {
    const double delta = theta - theta_p;
    double sum = 0.0;
    for (int a = 1; a <= terms; ++a) sum += std::cos(a * delta) / (1.0 + Lambda * a);
    return (1.0 + 2.0 * sum) / (2.0 * M_PI);
}

double ball_eigenvalue(int l, BallSide side) {
    require(l >= 0, ErrorKind::InvalidParam, "l must be >= 0");
    return side == BallSide::Interior ? l : l + 1.0;
}

std::int64_t ball_degeneracy(int l, int d) {
    require(l >= 0, ErrorKind::InvalidParam, "l must be >= 0");
    require(d >= 3, ErrorKind::InvalidParam, "d must be >= 3");
    // binom(l+d-3, l) computed incrementally stays integral at every step.
    std::int64_t binom = 1;
    for (int k = 1; k <= d - 3; ++k) binom = binom * (l + k) / k;
    return (2LL * l + d - 2) * binom / (d - 2);
}

double poisson_kernel_ball(double r, double theta) {
    check_radius(r);
    return (1.0 - r * r) / (4.0 * M_PI * std::pow(1.0 - 2.0 * r * std::cos(theta) + r * r, 1.5));
}

double ball_spread_density(double r, double theta, double Lambda, const SeriesConfig& cfg) {
    check_radius(r);
    require(Lambda >= 0.0, ErrorKind::InvalidParam, "Lambda must be >= 0");
    if (r == 0.0) return 1.0 / (4.0 * M_PI);
    const int n = truncation(cfg, [r](int N) {
        return (2.0 * N + 3.0) * std::pow(r, N + 1) / (4.0 * M_PI * (1.0 - r) * (1.0 - r));
    });
    const double x = std::cos(theta);
    double p_prev = 1.0, p = x;  // P_0, P_1
    double sum = 1.0;
    double rp = 1.0;
    for (int l = 1; l <= n; ++l) {
        rp *= r;
        sum += (2.0 * l + 1.0) * rp * p / (1.0 + Lambda * l);
        const double next = ((2.0 * l + 1.0) * x * p - l * p_prev) / (l + 1.0);
        p_prev = p;
        p = next;
    }
    return sum / (4.0 * M_PI);
}

AnalyticSpectrum disk_spectrum(int alpha_max, bool exterior) {
    require(alpha_max >= 0, ErrorKind::InvalidParam, "alpha_max must be >= 0");
    AnalyticSpectrum s;
    s.kind = exterior ? SpectrumKind::DiskExterior : SpectrumKind::DiskInterior;
    for (int a = 0; a <= alpha_max; ++a) s.modes.push_back({a, double(a), a == 0 ? 1 : 2});
    return s;
}

AnalyticSpectrum ball_spectrum(int l_max, BallSide side, int d) {
    require(l_max >= 0, ErrorKind::InvalidParam, "l_max must be >= 0");
    AnalyticSpectrum s;
    s.kind = side == BallSide::Interior ? SpectrumKind::BallInterior : SpectrumKind::BallExterior;
    for (int l = 0; l <= l_max; ++l) s.modes.push_back({l, ball_eigenvalue(l, side), ball_degeneracy(l, d)});
    return s;
}

AnalyticSpectrum annulus_spectrum(double R, int alpha_max) {
    require(R > 1.0 && std::isfinite(R), ErrorKind::InvalidParam, "annulus requires R > 1");
    require(alpha_max >= 0, ErrorKind::InvalidParam, "alpha_max must be >= 0");
    AnalyticSpectrum s;
    s.kind = SpectrumKind::Annulus;
    s.outer_radius = R;
    s.modes.push_back({0, 1.0 / std::log(R), 1});
    for (int a = 1; a <= alpha_max; ++a) {
        // coth(a ln R) written to stay finite when R^{2a} overflows
        const double q = std::exp(-2.0 * a * std::log(R));
        s.modes.push_back({a, a * (1.0 + q) / (1.0 - q), 2});
    }
    return s;
}

ImpedanceValue impedance_from_spectrum(const std::vector<double>& mu, const std::vector<double>& F, double Lambda,
                                       double D, std::optional<double> Z_cell0, bool want_spectroscopic) {
    require(mu.size() == F.size(), ErrorKind::InvalidParam, "mu and F must have equal length");
    require(Lambda >= 0.0, ErrorKind::InvalidParam, "Lambda must be >= 0");
    require(D > 0.0, ErrorKind::InvalidParam, "D must be > 0");
    ImpedanceValue out;
    double sum = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        require(mu[k] >= 0.0, ErrorKind::InvalidParam, "eigenvalues must be >= 0");
        sum += F[k] / (1.0 + Lambda * mu[k]);
    }
    out.Z = Lambda / D * sum;
    if (!want_spectroscopic) return out;
    require(Z_cell0.has_value(), ErrorKind::MissingCellImpedance, "Z_cell(0) is needed for the spectroscopic impedance");
    out.Z_cell0 = *Z_cell0;
    out.Z_sp = out.Z == 0.0 ? 0.0 : 1.0 / (1.0 / out.Z - 1.0 / *Z_cell0);
    return out;
}

double zeta(const std::vector<double>& mu, const std::vector<double>& F, double lambda) {
    require(mu.size() == F.size(), ErrorKind::InvalidParam, "mu and F must have equal length");
    require(lambda >= 0.0, ErrorKind::InvalidParam, "lambda must be >= 0");
    double z = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) z += F[k] * std::exp(-lambda * mu[k]);
    return z;
}

double annulus_cell_impedance0(double R, double D) {
    require(R > 1.0, ErrorKind::InvalidParam, "annulus requires R > 1");
    require(D > 0.0, ErrorKind::InvalidParam, "D must be > 0");
    return std::log(R) / (2.0 * M_PI * D);
}

}  // namespace prbm
