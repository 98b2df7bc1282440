#include <doctest.h>

#include <gsl/gsl_sf_expint.h>

#include <chrono>
#include <cmath>

#include "prbm/error.hpp"
#include "prbm/halfspace.hpp"
#include "prbm/rng.hpp"

using namespace prbm;

namespace {

constexpr double kEuler = 0.57721566490153286;

QuadratureConfig tight() {
    QuadratureConfig q;
    q.rel_tol = 1e-11;
    return q;
}

// Direct quadrature of the defining z-integral of the stopping-time density.
double rho_raw(double t, double Lambda) {
    auto f = [=](double z) {
        return z * std::exp(-z * z / (2 * t) - z / Lambda) / (Lambda * std::sqrt(2 * M_PI) * std::pow(t, 1.5));
    };
    return integrate_to_infinity(f, 0.0, tight()).value;
}

// Closed-form CDF: F(t) = 1 - exp(u^2) erfc(u), u = sqrt(t/2)/Lambda.
double cdf_closed(double t, double Lambda) {
    const double u = std::sqrt(t / 2) / Lambda;
    return 1.0 - std::exp(u * u) * std::erfc(u);
}

// Planar kernel in d = 2 through cosine and sine integrals:
// int_0^inf u e^{-u}/(u^2+s^2) du = -Ci(s) cos(s) - (Si(s) - pi/2) sin(s).
double kernel2_closed(double s, double Lambda) {
    const double sg = s / Lambda;
    const double v = -gsl_sf_Ci(sg) * std::cos(sg) - (gsl_sf_Si(sg) - M_PI / 2) * std::sin(sg);
    return v / (M_PI * Lambda);
}

double cauchy(double x, double y, double s) { return y / (M_PI * ((s - x) * (s - x) + y * y)); }

// Spread density as an exponential mixture of Cauchy laws at heights y + Lambda u.
double spread_mixture(double x, double y, double s, double Lambda) {
    auto f = [=](double u) { return std::exp(-u) * cauchy(x, y + Lambda * u, s); };
    return integrate_to_infinity(f, 0.0, tight()).value;
}

}  // namespace

TEST_CASE("stopping-time density matches its defining integral") {
    for (double Lambda : {0.5, 1.0, 3.0})
        for (double t : {1e-3, 0.1, 1.0, 7.0, 100.0}) {
            const double ref = rho_raw(t, Lambda);
            CHECK(stopping_time_density(t, Lambda) == doctest::Approx(ref).epsilon(1e-9));
        }
}

TEST_CASE("stopping-time density is normalized and nonnegative") {
    auto f = [](double v) { return v > 0 ? 2 * v * stopping_time_density(v * v, 1.0) : 2 / std::sqrt(2 * M_PI); };
    const double total = integrate_to_infinity(f, 0.0, tight()).value;
    CHECK(std::abs(total - 1.0) < 1e-8);
    for (double t = 1e-10; t < 1e12; t *= 3.7) CHECK(stopping_time_density(t, 1.0) >= 0.0);
}

TEST_CASE("stopping-time density asymptotes") {
    const double Lambda = 1.0;
    // small t: rho sqrt(t) -> 1/(sqrt(2 pi) Lambda)
    const double t0 = 1e-8;
    CHECK(stopping_time_density(t0, Lambda) * std::sqrt(t0) * std::sqrt(2 * M_PI) * Lambda ==
          doctest::Approx(1.0).epsilon(0.01));
    // large t: rho t^{3/2} -> Lambda / sqrt(2 pi)
    const double t1 = 1e8;
    CHECK(stopping_time_density(t1, Lambda) * std::pow(t1, 1.5) * std::sqrt(2 * M_PI) / Lambda ==
          doctest::Approx(1.0).epsilon(0.01));
    // the same at t/(2 Lambda^2) in {1e-8, 1e8} for another Lambda
    const double L2 = 2.5;
    for (double ratio : {1e-8, 1e8}) {
        const double t = 2 * L2 * L2 * ratio;
        const double pref = ratio < 1 ? 1.0 / (std::sqrt(2 * M_PI) * L2 * std::sqrt(t))
                                      : L2 / (std::sqrt(2 * M_PI) * std::pow(t, 1.5));
        CHECK(stopping_time_density(t, L2) / pref == doctest::Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("stopping-time CDF by quadrature agrees with the closed form") {
    for (double Lambda : {0.3, 1.0, 2.0})
        for (double t : {1e-4, 0.05, 0.5, 2.0, 30.0, 400.0}) {
            if (std::sqrt(t / 2) / Lambda > 25) continue;  // closed form overflows in double
            CHECK(stopping_time_cdf(t, Lambda) == doctest::Approx(cdf_closed(t, Lambda)).epsilon(1e-8));
        }
    CHECK(stopping_time_cdf(0.0, 1.0) == 0.0);
}

TEST_CASE("stopping-time density rejects bad input") {
    CHECK_THROWS_AS(stopping_time_density(0.0, 1.0), Error);
    CHECK_THROWS_AS(stopping_time_density(1.0, 0.0), Error);
    try {
        stopping_time_density(1e300, 1e-300);
        FAIL("expected overflow");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NumericOverflow);
    }
}

TEST_CASE("planar absorption kernel in two dimensions") {
    for (double Lambda : {0.5, 1.0, 4.0})
        for (double s : {1e-3, 0.1, 0.7, 2.0, 15.0, 300.0})
            CHECK(spread_kernel_t(s, Lambda, 2) == doctest::Approx(kernel2_closed(s, Lambda)).epsilon(1e-8));
    CHECK(std::isinf(spread_kernel_t(0.0, 1.0, 2)));
    CHECK(std::isinf(spread_kernel_t(0.0, 1.0, 3)));
    RngStream g(3, 0);
    for (int k = 0; k < 20; ++k) {
        const double s = 10 * g.uniform();
        CHECK(spread_kernel_t(s, 1.3, 2) == spread_kernel_t(-s, 1.3, 2));
        CHECK(spread_kernel_t(std::vector<double>{s, 0.0}, 1.3) == spread_kernel_t(std::vector<double>{0.0, -s}, 1.3));
    }
}

TEST_CASE("planar absorption kernel is normalized") {
    const double X = 1e3;
    auto f = [](double s) { return spread_kernel_t(s, 1.0, 2); };
    const double mass = 2 * integrate_with_breaks(f, {0.0, 1.0, 10.0, X}, tight()).value;
    CHECK(std::abs(mass - 1.0) < 1e-3);
    // tail beyond X is Lambda/(pi s^2), so the full line adds 2/(pi X)
    CHECK(std::abs(mass + 2.0 / (M_PI * X) - 1.0) < 1e-6);
    // three dimensions: radial integral with tail 2 pi int_X^inf s Lambda/(2 pi s^3) ds = Lambda/X
    auto g = [](double s) { return 2 * M_PI * s * spread_kernel_t(s, 1.0, 3); };
    const double mass3 = integrate_with_breaks(g, {0.0, 1.0, 10.0, X}, tight()).value + 1.0 / X;
    CHECK(std::abs(mass3 - 1.0) < 1e-5);
}

TEST_CASE("eta at large argument") {
    const double z = 1e3;
    CHECK(std::abs(eta(z, 2, tight()) - (1.0 - 5.0 * 1e-6)) < 1e-9);
    CHECK(std::abs(eta(z, 3, tight()) - (1.0 - 7.5 * 1e-6)) < 1e-9);
    // kernel over the harmonic density seen from height Lambda at |s| = 100 Lambda
    const double s = 100.0, Lambda = 1.0;
    const double omega = harmonic_density_halfspace({0.0, Lambda}, {s});
    const double ratio = spread_kernel_t(s, Lambda, 2) / omega;
    CHECK(std::abs(ratio - (1.0 - 5e-4)) < 2e-6);
    // the next term of the expansion in d = 2 is +114 z^{-4}
    CHECK(std::abs(ratio - (1.0 - 5e-4 + 114e-8)) < 1e-8);
}

TEST_CASE("eta at small argument") {
    // eta_3(z) ~ 1/z and eta_2(z) ~ -ln z - Euler gamma
    CHECK(eta(1e-4, 3) * 1e-4 == doctest::Approx(1.0).epsilon(0.01));
    CHECK(eta(1e-6, 2) / (-std::log(1e-6) - kEuler) == doctest::Approx(1.0).epsilon(0.01));
    // Lambda^{d-1} t_Lambda(s) ~ Gamma(d/2)/pi^{d/2} z^{2-d} for d = 3
    const double Lambda = 2.0, z = 1e-4;
    const double lhs = Lambda * Lambda * spread_kernel_t(z * Lambda, Lambda, 3);
    CHECK(lhs / (std::tgamma(1.5) / std::pow(M_PI, 1.5) / z) == doctest::Approx(1.0).epsilon(0.01));
    // and Lambda t_Lambda(s) ~ (1/pi) |ln z| in d = 2, up to the constant -gamma/pi
    const double z2 = 1e-6;
    const double lhs2 = Lambda * spread_kernel_t(z2 * Lambda, Lambda, 2);
    CHECK(lhs2 / ((-std::log(z2) - kEuler) / M_PI) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("eta times the harmonic density reproduces the kernel") {
    RngStream g(11, 0);
    for (int d : {2, 3})
        for (int k = 0; k < 10; ++k) {
            const double Lambda = 0.2 + 2 * g.uniform();
            const double s = 5 * g.uniform() + 1e-3;
            std::vector<double> x(d, 0.0), sv(d - 1, 0.0);
            x[d - 1] = Lambda;
            sv[0] = s;
            const double prod = eta(s / Lambda, d) * harmonic_density_halfspace(x, sv);
            CHECK(prod == doctest::Approx(spread_kernel_t(s, Lambda, d)).epsilon(1e-8));
        }
}

TEST_CASE("absorption probability on a flat disk") {
    auto t0 = std::chrono::steady_clock::now();
    const double p2 = absorption_probability_disk(0.5, 1.0, 2);
    const double p3 = absorption_probability_disk(1.0, 1.0, 3);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(std::abs(p2 - 0.4521) < 5e-4);
    CHECK(std::abs(p3 - 0.4611) < 5e-4);
    CHECK(secs < 1.0);
    CHECK(absorption_probability_disk(0.0, 1.0, 2) == 0.0);
    CHECK(absorption_probability_disk(1e6, 1.0, 2) > 1 - 1e-3);
    CHECK(absorption_probability_disk(1e6, 1.0, 3) > 1 - 1e-3);
}

TEST_CASE("absorption probability agrees with integrating the kernel") {
    for (double r : {0.1, 0.5, 2.0}) {
        // d = 2: 2 int_0^r t(s) ds, log singularity at 0 handled by qags
        auto f2 = [](double s) { return s > 0 ? 2 * spread_kernel_t(s, 1.0, 2) : 0.0; };
        CHECK(absorption_probability_disk(r, 1.0, 2) == doctest::Approx(integrate(f2, 0.0, r, tight()).value).epsilon(1e-7));
        // d = 2 closed inner integral: (2/pi) arctan(r/z) averaged over z ~ Exp(1)
        auto g2 = [r](double z) { return std::exp(-z) * 2 / M_PI * std::atan(r / z); };
        CHECK(absorption_probability_disk(r, 1.0, 2) == doctest::Approx(integrate_to_infinity(g2, 0.0, tight()).value).epsilon(1e-8));
        auto f3 = [](double s) { return s > 0 ? 2 * M_PI * s * spread_kernel_t(s, 1.0, 3) : 0.0; };
        CHECK(absorption_probability_disk(r, 1.0, 3) == doctest::Approx(integrate(f3, 0.0, r, tight()).value).epsilon(1e-7));
    }
}

TEST_CASE("absorption probability is monotone and scale invariant") {
    for (int d : {2, 3}) {
        double prev = 0.0;
        for (double r = 0.01; r < 100; r *= 1.5) {
            const double p = absorption_probability_disk(r, 1.0, d);
            CHECK(p >= prev);
            prev = p;
            for (double c : {0.01, 7.0})
                CHECK(absorption_probability_disk(c * r, c, d) == doctest::Approx(p).epsilon(1e-9));
        }
    }
}

TEST_CASE("half-space harmonic density") {
    CHECK(harmonic_density_halfspace({0.0, 1.0}, {0.0}) == doctest::Approx(1 / M_PI));
    CHECK(harmonic_density_halfspace({0.0, 0.0, 1.0}, {0.0, 0.0}) == doctest::Approx(1 / (2 * M_PI)));
    auto f = [](double s) { return harmonic_density_halfspace({0.0, 1.0}, {s}); };
    CHECK(integrate_real_line(f, tight()).value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(harmonic_density_halfspace({0.0, -1.0}, {0.0}), Error);
}

TEST_CASE("spread density: Dirichlet limit, mixture and convolution oracles") {
    for (double s : {-3.0, -0.4, 0.0, 0.25, 2.0, 9.0}) {
        CHECK(std::abs(spread_density_halfspace({0.3, 1.0}, {s}, 1e-8) - cauchy(0.3, 1.0, s)) < 1e-6);
        for (double Lambda : {0.1, 1.0, 5.0})
            CHECK(std::abs(spread_density_halfspace({0.3, 0.7}, {s}, Lambda) - spread_mixture(0.3, 0.7, s, Lambda)) < 1e-6);
    }
    const double x = 0.0, y = 0.5, Lambda = 1.0;
    for (double s : {0.0, 0.8, 3.0}) {
        auto conv = [=](double sp) { return cauchy(x, y, sp) * (sp == s ? 0.0 : spread_kernel_t(s - sp, Lambda, 2)); };
        const double ref = integrate_with_breaks(conv, {s - 1e5, std::min(x, s) - 1, s, std::max(x, s) + 1, s + 1e5}).value;
        CHECK(std::abs(spread_density_halfspace({x, y}, {s}, Lambda) - ref) < 1e-6);
    }
}

TEST_CASE("spread density is normalized and rejects tiny heights") {
    for (double Lambda : {0.2, 1.0, 10.0}) {
        auto f = [Lambda](double s) { return spread_density_halfspace({0.0, 1.0}, {s}, Lambda); };
        // density ~ C/s^2 at large |s|; integrate (-1e4, 1e4) and add the exact Cauchy-like tail 2 (y + Lambda)/(pi 1e4)
        const double core = integrate_with_breaks(f, {-1e4, -1, 0, 1, 1e4}).value;
        CHECK(std::abs(core + 2 * (1.0 + Lambda) / (M_PI * 1e4) - 1.0) < 1e-6);
    }
    try {
        spread_density_halfspace({0.0, 1e-9}, {0.5}, 1.0);
        FAIL("expected SlowConvergence");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SlowConvergence);
    }
}
