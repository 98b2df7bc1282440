#include <doctest.h>

#include <cmath>
#include <map>

#include "prbm/error.hpp"
#include "prbm/halfspace.hpp"
#include "prbm/spectral.hpp"
#include "prbm/walkers.hpp"

using namespace prbm;

namespace {

double cauchy_cdf(double s, double x, double y) { return 0.5 + std::atan((s - x) / y) / M_PI; }

// chi-square statistic of a histogram against expected bin probabilities
// (including under/overflow as two extra cells).
double chi_square(const MeasureHistogram& h, const std::vector<double>& p_bins, double p_under, double p_over) {
    double chi = 0.0;
    const double n = double(h.total);
    auto add = [&](double obs, double p) {
        if (p * n > 0) chi += (obs - n * p) * (obs - n * p) / (n * p);
    };
    for (std::size_t k = 0; k < p_bins.size(); ++k) add(double(h.counts[k]), p_bins[k]);
    add(double(h.underflow), p_under);
    add(double(h.overflow), p_over);
    return chi;
}

bool same_record(const AbsorptionRecord& a, const AbsorptionRecord& b) {
    return a.fate == b.fate && a.n_reflections == b.n_reflections && a.n_hits == b.n_hits && a.steps == b.steps &&
           a.point.position == b.point.position && a.boundary_index == b.boundary_index;
}

const DomainSpec kHalfPlane = make_canonical(DomainKind::HalfSpace, {2, 0});

}  // namespace

TEST_CASE("threshold sampling") {
    RngStream g(17, 0);
    double sum = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) sum += sample_threshold(2.0, g);
    CHECK(std::abs(sum / n - 2.0) < 0.01);
    CHECK(sample_threshold(0.0, g) == 0.0);
    RngStream a(5, 9), b(5, 9);
    CHECK(sample_threshold(1.0, a) == sample_threshold(1.0, b));
}

TEST_CASE("reflection probability follows the jump and the physical length") {
    CHECK(JumpParams{1.0, 1.0}.epsilon() == 0.5);
    CHECK(JumpParams{0.01, 1.0}.epsilon() == doctest::Approx(1 / 1.01));
    CHECK(JumpParams{0.01, 0.0}.epsilon() == 0.0);
    CHECK_THROWS_AS(JumpParams({0.0, 1.0}).validate(), Error);
}

TEST_CASE("Dirichlet walker reproduces the Cauchy hitting law") {
    JumpParams p{0.01, 0.0};
    Binning bins{Binning::Kind::Coordinate, -10, 10, 40};
    EnsembleConfig cfg{100000, 2024, 0, 0.01};
    auto h = estimate_spread_measure(kHalfPlane, {0, 1, 0}, p, bins, cfg, {10'000'000, 1e12});
    std::vector<double> pb;
    for (int k = 0; k < 40; ++k) pb.push_back(cauchy_cdf(h.edges[k + 1], 0, 1) - cauchy_cdf(h.edges[k], 0, 1));
    // 41 degrees of freedom; the 0.999 quantile is about 74
    CHECK(chi_square(h, pb, cauchy_cdf(-10, 0, 1), 1 - cauchy_cdf(10, 0, 1)) < 74.0);
    CHECK(h.reflections_total == 0);
}

TEST_CASE("Dirichlet histogram equals first hits drawn from the same seeds") {
    JumpParams p{0.05, 0.0};
    Binning bins{Binning::Kind::Coordinate, -3, 3, 12};
    EnsembleConfig cfg{20000, 99, 1, 0.01};
    auto h = estimate_spread_measure(kHalfPlane, {0.2, 0.5, 0}, p, bins, cfg, {10'000'000, 1e12});
    // independent re-derivation: first uniform of the hit stream through the Cauchy quantile
    MeasureHistogram ref;
    ref.counts.assign(12, 0);
    for (int i = 0; i < cfg.n_walkers; ++i) {
        RngStream hits = RngStream(cfg.seed, i).split(0);
        const double s = 0.2 + 0.5 * std::tan(M_PI * (hits.uniform() - 0.5));
        if (s < -3) ++ref.underflow;
        else if (s >= 3) ++ref.overflow;
        else ++ref.counts[std::min(11, int((s + 3) / 0.5))];
    }
    CHECK(h.counts == ref.counts);
    CHECK(h.underflow == ref.underflow);
    CHECK(h.overflow == ref.overflow);
}

TEST_CASE("mean number of reflections is eps/(1-eps)") {
    JumpParams p{0.01, 1.0};
    Binning bins{Binning::Kind::Coordinate, -1, 1, 1};
    EnsembleConfig cfg{100000, 7, 0, 0.01};
    auto h = estimate_spread_measure(kHalfPlane, {0, 0.01, 0}, p, bins, cfg, {10'000'000, 1e12});
    CHECK(h.censored == 0);
    CHECK(std::abs(h.mean_reflections() - 100.0) < 1.0);
}

TEST_CASE("local and global absorption rules give identical trajectories") {
    const std::vector<std::pair<DomainSpec, Vec3>> cases{
        {kHalfPlane, {0, 0.3, 0}},
        {make_canonical(DomainKind::DiskInterior), {0.4, -0.2, 0}},
        {make_canonical(DomainKind::DiskExterior), {1.5, 0.5, 0}},
        {make_canonical(DomainKind::BallInterior), {0.1, 0.2, 0.3}},
        {make_canonical(DomainKind::BallExterior), {0.0, 1.5, 0.5}},
        {make_canonical(DomainKind::Annulus, {0, 3.0}), {1.5, 0.5, 0}},
    };
    for (const auto& [dom, x] : cases) {
        const JumpParams p{0.05, 0.4};
        for (int i = 0; i < 300; ++i) {
            const RngStream g(31, i);
            const auto local = run_jump_walker(dom, x, p, g, {}, AbsorptionRule::Local);
            const auto global = run_jump_walker(dom, x, p, g, {}, AbsorptionRule::Global);
            CHECK(same_record(local, global));
            CHECK(local.local_time_proxy == doctest::Approx(p.a * local.n_hits));
        }
    }
}

TEST_CASE("walkers are deterministic and thread-count independent") {
    const JumpParams p{0.02, 0.5};
    const auto disk = make_canonical(DomainKind::DiskInterior);
    Binning bins{Binning::Kind::Coordinate, 0, 2 * M_PI, 16};
    EnsembleConfig one{20000, 5, 1, 0.01}, three{20000, 5, 3, 0.01};
    auto h1 = estimate_spread_measure(disk, {0.3, 0.1, 0}, p, bins, one);
    auto h3 = estimate_spread_measure(disk, {0.3, 0.1, 0}, p, bins, three);
    CHECK(h1.counts == h3.counts);
    CHECK(h1.reflections_total == h3.reflections_total);
    auto r1 = run_jump_walker(disk, {0.3, 0.1, 0}, p, RngStream(8, 8));
    auto r2 = run_jump_walker(disk, {0.3, 0.1, 0}, p, RngStream(8, 8));
    CHECK(same_record(r1, r2));
}

TEST_CASE("disk started at the centre absorbs uniformly in angle") {
    const auto disk = make_canonical(DomainKind::DiskInterior);
    Binning bins{Binning::Kind::Coordinate, 0, 2 * M_PI, 12};
    EnsembleConfig cfg{60000, 12, 0, 0.01};
    auto h = estimate_spread_measure(disk, {0, 0, 0}, {0.05, 1.0}, bins, cfg);
    CHECK(h.working + h.source + h.censored == h.total);
    for (int k = 0; k < 12; ++k) CHECK(std::abs(h.estimate(k) - 1.0 / 12) < 3 * std::sqrt((1.0 / 12) * (11.0 / 12) / h.total) + 1e-12);
}

TEST_CASE("jump-walker histograms agree at a and a/2") {
    const auto disk = make_canonical(DomainKind::DiskInterior);
    Binning bins{Binning::Kind::Coordinate, 0, 2 * M_PI, 8};
    EnsembleConfig cfg{40000, 3, 0, 0.01};
    auto ha = estimate_spread_measure(disk, {0.5, 0, 0}, {0.02, 0.3}, bins, cfg);
    cfg.seed = 4;
    auto hb = estimate_spread_measure(disk, {0.5, 0, 0}, {0.01, 0.3}, bins, cfg);
    for (int k = 0; k < 8; ++k) {
        const double s = std::hypot(ha.stderr_of(k), hb.stderr_of(k));
        CHECK(std::abs(ha.estimate(k) - hb.estimate(k)) < 3 * s);
    }
}

TEST_CASE("spread measure of the disk matches the series") {
    // from (r, 0) with jump a the absorption density approaches the analytic series
    const auto disk = make_canonical(DomainKind::DiskInterior);
    const int nb = 10;
    Binning bins{Binning::Kind::Coordinate, 0, 2 * M_PI, nb};
    EnsembleConfig cfg{100000, 77, 0, 0.01};
    const double r = 0.6, L = 0.5;
    auto h = estimate_spread_measure(disk, {r, 0, 0}, {0.005, L}, bins, cfg);
    for (int k = 0; k < nb; ++k) {
        const double p = integrate([&](double t) { return disk_spread_density(r, t, L); }, h.edges[k], h.edges[k + 1]).value;
        CHECK(std::abs(h.estimate(k) - p) < 3 * std::sqrt(p * (1 - p) / h.total) + 0.003);
    }
}

TEST_CASE("exterior and annulus hitting laws") {
    EnsembleConfig cfg{40000, 21, 0, 0.01};
    // exterior ball from r = 2: hit with probability 1/2
    auto hb = estimate_spread_measure(make_canonical(DomainKind::BallExterior), {0, 0, 2}, {0.1, 0.0},
                                      {Binning::Kind::Coordinate, 0, M_PI, 4}, cfg);
    CHECK(std::abs(double(hb.working) / hb.total - 0.5) < 3 * std::sqrt(0.25 / hb.total));
    // annulus from rho: inner circle first with probability ln(R/rho)/ln R
    const double R = 3.0, rho = 1.7;
    auto an = make_canonical(DomainKind::Annulus, {0, R});
    auto ha = estimate_spread_measure(an, {rho, 0, 0}, {0.1, 0.0}, {Binning::Kind::Coordinate, 0, 2 * M_PI, 8}, cfg);
    const double p_in = std::log(R / rho) / std::log(R);
    CHECK(std::abs(double(ha.working) / ha.total - p_in) < 3 * std::sqrt(p_in * (1 - p_in) / ha.total));
    // angular law on the inner circle against the separated-variables series
    auto density = [&](double th) {
        double s = std::log(R / rho) / std::log(R) / (2 * M_PI);
        for (int k = 1; k < 200; ++k)
            s += std::cos(k * th) / M_PI * (std::pow(R, 2.0 * k) * std::pow(rho, -k) - std::pow(rho, k)) /
                 (std::pow(R, 2.0 * k) - 1);
        return s;
    };
    for (int k = 0; k < 8; ++k) {
        const double p = integrate(density, ha.edges[k], ha.edges[k + 1]).value;
        CHECK(std::abs(ha.estimate(k) - p) < 3.5 * std::sqrt(p * (1 - p) / ha.total));
    }
    // exterior disk from (2, 0): Poisson law of the exterior
    auto hd = estimate_spread_measure(make_canonical(DomainKind::DiskExterior), {2, 0, 0}, {0.1, 0.0},
                                      {Binning::Kind::Coordinate, 0, 2 * M_PI, 8}, cfg);
    for (int k = 0; k < 8; ++k) {
        const double p = integrate([](double t) { return 3.0 / (2 * M_PI * (5 - 4 * std::cos(t))); }, hd.edges[k],
                                   hd.edges[k + 1]).value;
        CHECK(std::abs(hd.estimate(k) - p) < 3.5 * std::sqrt(p * (1 - p) / hd.total));
    }
    // interior ball from the centre: cos(theta) uniform
    auto hc = estimate_spread_measure(make_canonical(DomainKind::BallInterior), {0, 0, 0}, {0.1, 0.0},
                                      {Binning::Kind::Coordinate, 0, M_PI, 6}, cfg);
    for (int k = 0; k < 6; ++k) {
        const double p = (std::cos(hc.edges[k]) - std::cos(hc.edges[k + 1])) / 2;
        CHECK(std::abs(hc.estimate(k) - p) < 3.5 * std::sqrt(p * (1 - p) / hc.total));
    }
}

TEST_CASE("lattice walker: Dirichlet case absorbs at first contact") {
    auto box = make_box({6, 4}, 0.25, std::vector<FaceKind>(4, FaceKind::Working));
    for (int i = 0; i < 200; ++i) {
        auto r = run_lattice_walker(box, 5, 0.0, RngStream(1, i));
        CHECK(r.fate == Fate::AbsorbedOnWorking);
        CHECK(r.n_hits == 1);
        CHECK(r.n_reflections == 0);
        CHECK(r.boundary_index >= 0);
    }
}

TEST_CASE("lattice walker: reflections are geometric") {
    // strip of width 4 closed by working walls; eps = 0.9 means Lambda = 9 a
    const double a = 0.1;
    auto strip = make_box({4, 4}, a, {FaceKind::Working, FaceKind::Working, FaceKind::Reflecting, FaceKind::Reflecting});
    const double eps = 0.9, Lambda = 9 * a;
    const int n = 1000000;
    std::map<std::int64_t, std::int64_t> counts;
    for (int i = 0; i < n; ++i) {
        auto r = run_lattice_walker(strip, 0, Lambda, RngStream(404, i));
        REQUIRE(r.fate == Fate::AbsorbedOnWorking);
        ++counts[r.n_reflections];
    }
    for (int k = 0; k <= 20; ++k) {
        const double p = (1 - eps) * std::pow(eps, k);
        const double emp = double(counts[k]) / n;
        const double sigma = std::sqrt(p * (1 - p) / n) / p;
        CHECK(std::abs(emp / p - 1) < 3 * sigma);
    }
}

TEST_CASE("ensemble count partition and censoring") {
    auto box = make_box({8, 8}, 0.125, {FaceKind::Working, FaceKind::Working, FaceKind::Source, FaceKind::Working});
    EnsembleConfig cfg{5000, 3, 0, 0.01};
    auto h = estimate_lattice_measure_from_source(box, 0.5, cfg);
    std::int64_t binned = 0;
    for (auto c : h.counts) binned += c;
    CHECK(binned == h.working);
    CHECK(h.working + h.source + h.censored == h.total);
    CHECK(h.total == 5000);
    // a tiny step cap censors everything and trips the ceiling
    WalkerCaps tight{3, 0};
    try {
        estimate_lattice_measure(box, 0, 0.5, cfg, tight);
        FAIL("expected CensoredFractionExceeded");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CensoredFractionExceeded);
    }
    cfg.censored_ceiling = 1.0;
    auto hc = estimate_lattice_measure(box, 0, 0.5, cfg, tight);
    CHECK(hc.working + hc.source + hc.censored == hc.total);
    CHECK(hc.censored > 0);
}

TEST_CASE("stopping-time law of the one-dimensional walk") {
    const double Lambda = 1.0;
    auto cdf = [&](double t) { return stopping_time_cdf(t, Lambda); };
    auto fine = estimate_stopping_time(Lambda, Lambda / 200, 20000, 1);
    CHECK(fine.censored + static_cast<std::int64_t>(fine.times.size()) == fine.total);
    CHECK(fine.ks_distance(cdf) < 0.02);
    // refinement does not make things worse
    auto c5 = estimate_stopping_time(Lambda, Lambda / 5, 100000, 2);
    auto c10 = estimate_stopping_time(Lambda, Lambda / 10, 100000, 3);
    CHECK(c10.ks_distance(cdf) <= c5.ks_distance(cdf));
    // the law depends on t / Lambda^2 only
    auto l1 = estimate_stopping_time(1.0, 1.0 / 100, 40000, 4);
    auto l2 = estimate_stopping_time(2.0, 2.0 / 100, 40000, 5);
    CHECK(l2.median() / l1.median() == doctest::Approx(4.0).epsilon(0.06));
    // the same seed reproduces the sample
    CHECK(estimate_stopping_time(1.0, 0.05, 1000, 9).times == estimate_stopping_time(1.0, 0.05, 1000, 9).times);
}
