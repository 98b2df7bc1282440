#include "prbm/walkers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

#include "prbm/error.hpp"

namespace prbm {

namespace {

struct Hit {
    Vec3 point{};
    Vec3 normal{};  // inward
    double coord = 0.0;
    bool on_source = false;
    bool escaped = false;
};

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

double angle_of(double x, double y) {
    double t = std::atan2(y, x);
    return t < 0 ? t + 2 * M_PI : t;
}

// Hitting point on the unit circle from an interior point x (|x| < 1): the
// Moebius image of a uniform angle is Poisson-distributed.
Vec3 disk_poisson_point(double x, double y, RngStream& g) {
    const double psi = 2 * M_PI * g.uniform();
    const double c = std::cos(psi), s = std::sin(psi);
    // (e^{i psi} + z) / (1 + conj(z) e^{i psi})
    const double nr = c + x, ni = s + y;
    const double dr = 1 + x * c + y * s, di = x * s - y * c;
    const double den = dr * dr + di * di;
    double px = (nr * dr + ni * di) / den, py = (ni * dr - nr * di) / den;
    const double n = std::hypot(px, py);
    return {px / n, py / n, 0.0};
}

// Hitting point on the unit sphere from |x| < 1. With q = (1 - 2rc + r^2)^{-1/2}
// the Poisson kernel is uniform in q.
Vec3 ball_poisson_point(const Vec3& x, RngStream& g) {
    const double r = norm(x);
    double c;
    if (r < 1e-12) {
        c = 2 * g.uniform() - 1;
    } else {
        const double q = 1 / (1 + r) + g.uniform() * (1 / (1 - r) - 1 / (1 + r));
        c = std::clamp((1 + r * r - 1 / (q * q)) / (2 * r), -1.0, 1.0);
    }
    const double phi = 2 * M_PI * g.uniform();
    Vec3 e0 = r < 1e-12 ? Vec3{0, 0, 1} : Vec3{x[0] / r, x[1] / r, x[2] / r};
    // any unit vector orthogonal to e0
    Vec3 t = std::abs(e0[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const double dp = t[0] * e0[0] + t[1] * e0[1] + t[2] * e0[2];
    Vec3 e1{t[0] - dp * e0[0], t[1] - dp * e0[1], t[2] - dp * e0[2]};
    const double n1 = norm(e1);
    for (double& v : e1) v /= n1;
    const Vec3 e2{e0[1] * e1[2] - e0[2] * e1[1], e0[2] * e1[0] - e0[0] * e1[2], e0[0] * e1[1] - e0[1] * e1[0]};
    const double sn = std::sqrt(std::max(0.0, 1 - c * c));
    Vec3 s{};
    for (int k = 0; k < 3; ++k) s[k] = c * e0[k] + sn * (std::cos(phi) * e1[k] + std::sin(phi) * e2[k]);
    const double ns = norm(s);
    for (double& v : s) v /= ns;
    return s;
}

// Angle (relative to the direction of the start point) of the first hit on the
// inner circle of the annulus 1 < |x| < R, conditioned on hitting it.
double annulus_inner_angle(double rho, double R, RngStream& g) {
    const double lnR = std::log(R);
    const double C = (1 - std::log(R / rho) / lnR) / (2 * M_PI);
    // remainder coefficients r_k = (rho^k - rho^{-k}) / (R^{2k} - 1) >= 0
    std::vector<double> rk;
    double hmax = 0.0;
    const double ratio = rho / (R * R);
    double pw = 1.0;
    for (int k = 1; k < 4000; ++k) {
        pw *= ratio;
        const double v = pw * (1 - std::pow(rho, -2.0 * k)) / (1 - std::pow(R, -2.0 * k));
        rk.push_back(v);
        hmax += v / M_PI;
        if (pw < 1e-17) break;
    }
    auto p_ext = [rho](double th) { return (rho * rho - 1) / (2 * M_PI * (rho * rho - 2 * rho * std::cos(th) + 1)); };
    auto target = [&](double th) {
        double s = 0.0;
        for (std::size_t k = 0; k < rk.size(); ++k) s += rk[k] * std::cos((k + 1.0) * th);
        return p_ext(th) - C - s / M_PI;
    };
    const double w_uniform = 2 * M_PI * hmax;
    for (;;) {
        double th;
        if (g.uniform() * (1 + w_uniform) < 1) {
            const Vec3 p = disk_poisson_point(1 / rho, 0.0, g);
            th = std::atan2(p[1], p[0]);
        } else {
            th = 2 * M_PI * g.uniform() - M_PI;
        }
        if (g.uniform() * (p_ext(th) + hmax) <= target(th)) return th;
    }
}

Hit sample_hit(const DomainSpec& dom, const Vec3& x, double escape_radius, RngStream& g) {
    Hit h;
    switch (dom.kind) {
        case DomainKind::HalfSpace: {
            const int d = dom.dimension;
            const double y = x[d - 1];
            if (d == 2) {
                const double s = x[0] + y * std::tan(M_PI * (g.uniform() - 0.5));
                h.point = {s, 0, 0};
                h.normal = {0, 1, 0};
                h.coord = s;
                h.escaped = !(std::abs(s) <= escape_radius);
            } else {
                const double u = g.uniform();
                const double rad = y * std::sqrt(1 / ((1 - u) * (1 - u)) - 1);
                const double phi = 2 * M_PI * g.uniform();
                h.point = {x[0] + rad * std::cos(phi), x[1] + rad * std::sin(phi), 0};
                h.normal = {0, 0, 1};
                h.coord = std::hypot(h.point[0], h.point[1]);
                h.escaped = !(h.coord <= escape_radius);
            }
            return h;
        }
        case DomainKind::DiskInterior: {
            h.point = disk_poisson_point(x[0], x[1], g);
            h.normal = {-h.point[0], -h.point[1], 0};
            h.coord = angle_of(h.point[0], h.point[1]);
            return h;
        }
        case DomainKind::DiskExterior: {
            const double r2 = x[0] * x[0] + x[1] * x[1];
            h.point = disk_poisson_point(x[0] / r2, x[1] / r2, g);
            h.normal = {h.point[0], h.point[1], 0};
            h.coord = angle_of(h.point[0], h.point[1]);
            return h;
        }
        case DomainKind::BallInterior: {
            h.point = ball_poisson_point(x, g);
            h.normal = {-h.point[0], -h.point[1], -h.point[2]};
            h.coord = std::acos(std::clamp(h.point[2], -1.0, 1.0));
            return h;
        }
        case DomainKind::BallExterior: {
            const double r = norm(x);
            // escape to infinity (the source) with probability 1 - 1/r
            if (g.uniform() >= 1 / r) {
                h.on_source = true;
                return h;
            }
            const double r2 = r * r;
            h.point = ball_poisson_point({x[0] / r2, x[1] / r2, x[2] / r2}, g);
            h.normal = h.point;
            h.coord = std::acos(std::clamp(h.point[2], -1.0, 1.0));
            return h;
        }
        case DomainKind::Annulus: {
            const double R = dom.outer_radius;
            const double rho = std::hypot(x[0], x[1]);
            if (g.uniform() >= std::log(R / rho) / std::log(R)) {
                h.on_source = true;
                return h;
            }
            const double th = annulus_inner_angle(rho, R, g) + std::atan2(x[1], x[0]);
            h.point = {std::cos(th), std::sin(th), 0};
            h.normal = h.point;
            h.coord = angle_of(h.point[0], h.point[1]);
            return h;
        }
        case DomainKind::Lattice: break;
    }
    fail(ErrorKind::InvalidParam, "jump walker needs a canonical domain");
}

void check_start(const DomainSpec& dom, const Vec3& x, double a) {
    switch (dom.kind) {
        case DomainKind::HalfSpace:
            require(dom.dimension == 2 || dom.dimension == 3, ErrorKind::InvalidParam,
                    "half-space walker supports d = 2 and 3");
            require(x[dom.dimension - 1] > 0, ErrorKind::InvalidParam, "start must lie above the boundary");
            return;
        case DomainKind::DiskInterior:
            require(std::hypot(x[0], x[1]) < 1, ErrorKind::InvalidParam, "start must lie inside the unit disk");
            require(a < 1, ErrorKind::InvalidParam, "jump must be smaller than the radius");
            return;
        case DomainKind::DiskExterior:
            require(std::hypot(x[0], x[1]) > 1, ErrorKind::InvalidParam, "start must lie outside the unit disk");
            return;
        case DomainKind::BallInterior:
            require(norm(x) < 1, ErrorKind::InvalidParam, "start must lie inside the unit ball");
            require(a < 1, ErrorKind::InvalidParam, "jump must be smaller than the radius");
            return;
        case DomainKind::BallExterior:
            require(norm(x) > 1, ErrorKind::InvalidParam, "start must lie outside the unit ball");
            return;
        case DomainKind::Annulus: {
            const double r = std::hypot(x[0], x[1]);
            require(r > 1 && r < dom.outer_radius, ErrorKind::InvalidParam, "start must lie inside the annulus");
            require(a < dom.outer_radius - 1, ErrorKind::InvalidParam, "jump must be smaller than the annulus width");
            return;
        }
        case DomainKind::Lattice: break;
    }
    fail(ErrorKind::InvalidParam, "jump walker needs a canonical domain");
}

inline int bounded(std::uint32_t r, int n) { return static_cast<int>((std::uint64_t{r} * std::uint64_t(n)) >> 32); }

// Survival function of the first return of the simple walk to 0 (in units of
// step pairs): P(tau > 2n - 1) = binom(2n, n) / 4^n.
double return_survival(double n) {
    if (n < 1) return 1.0;
    return std::exp(std::lgamma(2 * n + 1) - 2 * std::lgamma(n + 1) - 2 * n * std::log(2.0));
}

// Excursion length 0 -> 1 -> ... -> 0, in lattice steps, sampled exactly by
// inverting the survival function above.
double excursion_steps(RngStream& g) {
    const double u = g.uniform();
    // short excursions by the product recurrence
    double q = 1.0;
    for (int n = 1; n <= 64; ++n) {
        q *= (2.0 * n - 1) / (2.0 * n);
        if (q < u) return 2.0 * n;
    }
    // q_n ~ 1/sqrt(pi n): bracket around the asymptotic inverse, then bisect
    double guess = 1 / (M_PI * u * u);
    double lo = std::max(64.0, std::floor(guess / 2)), hi = std::ceil(2 * guess) + 2;
    while (return_survival(lo) < u) lo = std::max(64.0, std::floor(lo / 2));
    while (return_survival(hi) >= u) hi *= 2;
    while (hi - lo > 1) {
        const double mid = std::floor((lo + hi) / 2);
        (return_survival(mid) < u ? hi : lo) = mid;
    }
    return 2.0 * hi;
}

}  // namespace

void JumpParams::validate() const {
    require(a > 0 && std::isfinite(a), ErrorKind::InvalidParam, "jump distance a must be > 0");
    require(Lambda >= 0 && std::isfinite(Lambda), ErrorKind::InvalidParam, "Lambda must be >= 0");
}

const char* to_string(Fate f) noexcept {
    switch (f) {
        case Fate::AbsorbedOnWorking: return "working";
        case Fate::AbsorbedOnSource: return "source";
        case Fate::Censored: return "censored";
    }
    return "unknown";
}

int default_thread_count() {
    if (const char* env = std::getenv("PRBM_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

double sample_threshold(double Lambda, RngStream& rng) {
    require(Lambda >= 0, ErrorKind::InvalidParam, "Lambda must be >= 0");
    if (Lambda == 0) return 0.0;
    return -Lambda * std::log(rng.uniform());
}

std::int64_t geometric_budget(double eps, RngStream& rng, std::int64_t cap) {
    std::int64_t n = 0;
    while (n < cap && rng.uniform() >= 1 - eps) ++n;
    return n;
}

AbsorptionRecord run_jump_walker(const DomainSpec& dom, const Vec3& start, const JumpParams& p, const RngStream& rng,
                                 const WalkerCaps& caps, AbsorptionRule rule) {
    p.validate();
    check_start(dom, start, p.a);
    const double eps = p.epsilon();
    const double escape = caps.escape_radius > 0 ? caps.escape_radius : 1e4 * std::max(p.Lambda, p.a);
    RngStream hits = rng.split(0), decisions = rng.split(1);
    const std::int64_t budget = rule == AbsorptionRule::Global ? geometric_budget(eps, decisions, caps.max_steps) : -1;

    AbsorptionRecord rec;
    Vec3 x = start;
    while (rec.steps < caps.max_steps) {
        const Hit h = sample_hit(dom, x, escape, hits);
        ++rec.steps;
        if (h.escaped) break;
        if (h.on_source) {
            rec.fate = Fate::AbsorbedOnSource;
            return rec;
        }
        ++rec.n_hits;
        rec.local_time_proxy = p.a * rec.n_hits;
        const bool absorb = rule == AbsorptionRule::Local ? decisions.uniform() < 1 - eps : rec.n_reflections >= budget;
        if (absorb) {
            rec.fate = Fate::AbsorbedOnWorking;
            rec.point = {h.point, h.coord, h.normal};
            return rec;
        }
        ++rec.n_reflections;
        for (int k = 0; k < 3; ++k) x[k] = h.point[k] + p.a * h.normal[k];
    }
    rec.fate = Fate::Censored;
    return rec;
}

namespace {

AbsorptionRecord lattice_walk(const LatticeDomain& dom, int site, int first_hit, double Lambda, const RngStream& rng,
                              const WalkerCaps& caps) {
    require(Lambda >= 0, ErrorKind::InvalidParam, "Lambda must be >= 0");
    RngStream moves = rng.split(0), decisions = rng.split(1);
    const int nd = dom.directions();
    AbsorptionRecord rec;
    int b = first_hit;
    for (;;) {
        if (b >= 0) {
            const BoundarySite& bs = dom.boundary_sites()[b];
            if (bs.tag == BoundaryTag::Source) {
                rec.fate = Fate::AbsorbedOnSource;
                rec.boundary_index = b;
                return rec;
            }
            ++rec.n_hits;
            rec.local_time_proxy = dom.mesh() * rec.n_hits;
            const double h = dom.mesh() * dom.projected_cosine(b);
            const double eps = Lambda > 0 ? Lambda / (Lambda + h) : 0.0;
            if (decisions.uniform() < 1 - eps) {
                rec.fate = Fate::AbsorbedOnWorking;
                rec.boundary_index = b;
                rec.point = boundary_point(dom, b);
                return rec;
            }
            ++rec.n_reflections;
            site = dom.inward_index(b);
            b = -1;
        }
        if (rec.steps >= caps.max_steps) break;
        const int dir = bounded(moves.next_u32(), nd);
        ++rec.steps;
        const int nb = dom.neighbor(site, dir);
        if (nb >= 0) site = nb;
        else b = dom.link(site, dir);  // -1 for a wall: the walker stays
    }
    rec.fate = Fate::Censored;
    return rec;
}

}  // namespace

AbsorptionRecord run_lattice_walker(const LatticeDomain& dom, int start_bulk, double Lambda, const RngStream& rng,
                                    const WalkerCaps& caps) {
    require(start_bulk >= 0 && start_bulk < static_cast<int>(dom.bulk_count()), ErrorKind::InvalidParam,
            "start site is not a bulk site");
    return lattice_walk(dom, start_bulk, -1, Lambda, rng, caps);
}

AbsorptionRecord run_lattice_walker_from_boundary(const LatticeDomain& dom, int b, double Lambda, const RngStream& rng,
                                                  const WalkerCaps& caps) {
    require(b >= 0 && b < static_cast<int>(dom.boundary_count()), ErrorKind::InvalidParam,
            "boundary index out of range");
    return lattice_walk(dom, dom.inward_index(b), b, Lambda, rng, caps);
}

// ------------------------------------------------------------------ histograms

double MeasureHistogram::estimate(int bin) const { return total ? double(counts.at(bin)) / total : 0.0; }

double MeasureHistogram::stderr_of(int bin) const {
    if (!total) return 0.0;
    const double p = estimate(bin);
    return std::sqrt(p * (1 - p) / total);
}

double MeasureHistogram::mean_reflections() const {
    const std::int64_t absorbed = working + source;
    return absorbed ? double(reflections_total) / absorbed : 0.0;
}

void MeasureHistogram::merge(const MeasureHistogram& o) {
    require(o.counts.size() == counts.size(), ErrorKind::InvalidParam, "histogram binning mismatch");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
    underflow += o.underflow;
    overflow += o.overflow;
    total += o.total;
    working += o.working;
    source += o.source;
    censored += o.censored;
    reflections_total += o.reflections_total;
}

MeasureHistogram run_ensemble(const std::function<AbsorptionRecord(const RngStream&)>& walker, const Binning& binning,
                              const EnsembleConfig& cfg) {
    require(cfg.n_walkers >= 1, ErrorKind::InvalidParam, "n_walkers must be >= 1");
    require(binning.bins >= 1, ErrorKind::InvalidParam, "need at least one bin");
    MeasureHistogram empty;
    empty.counts.assign(binning.bins, 0);
    if (binning.kind == Binning::Kind::Coordinate) {
        require(binning.hi > binning.lo, ErrorKind::InvalidParam, "bin range must be nonempty");
        for (int i = 0; i <= binning.bins; ++i)
            empty.edges.push_back(binning.lo + (binning.hi - binning.lo) * i / binning.bins);
    }

    const int threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
    std::vector<MeasureHistogram> partial(threads, empty);
    parallel_chunks(cfg.n_walkers, threads, [&](int t, std::int64_t lo, std::int64_t hi) {
        MeasureHistogram& h = partial[t];
        for (std::int64_t i = lo; i < hi; ++i) {
            const AbsorptionRecord r = walker(RngStream(cfg.seed, static_cast<std::uint64_t>(i)));
            ++h.total;
            switch (r.fate) {
                case Fate::Censored: ++h.censored; continue;
                case Fate::AbsorbedOnSource: ++h.source; break;
                case Fate::AbsorbedOnWorking: {
                    ++h.working;
                    if (binning.kind == Binning::Kind::Sites) {
                        require(r.boundary_index >= 0 && r.boundary_index < binning.bins, ErrorKind::InvalidParam,
                                "site binning does not cover the boundary");
                        ++h.counts[r.boundary_index];
                    } else {
                        const double c = r.point.arclength_coord;
                        if (c < binning.lo) ++h.underflow;
                        else if (c >= binning.hi) ++h.overflow;
                        else {
                            int k = static_cast<int>((c - binning.lo) / (binning.hi - binning.lo) * binning.bins);
                            ++h.counts[std::min(k, binning.bins - 1)];
                        }
                    }
                    break;
                }
            }
            h.reflections_total += r.n_reflections;
        }
    });
    MeasureHistogram out = empty;
    for (const auto& h : partial) out.merge(h);
    if (double(out.censored) > cfg.censored_ceiling * double(out.total))
        fail(ErrorKind::CensoredFractionExceeded, std::to_string(out.censored) + " of " + std::to_string(out.total) +
                                                       " walkers censored (ceiling " +
                                                       std::to_string(cfg.censored_ceiling) + ")");
    return out;
}

MeasureHistogram estimate_spread_measure(const DomainSpec& dom, const Vec3& start, const JumpParams& p,
                                         const Binning& binning, const EnsembleConfig& cfg, const WalkerCaps& caps,
                                         AbsorptionRule rule) {
    p.validate();
    check_start(dom, start, p.a);
    return run_ensemble([&](const RngStream& g) { return run_jump_walker(dom, start, p, g, caps, rule); }, binning,
                        cfg);
}

MeasureHistogram estimate_lattice_measure_from_source(const LatticeDomain& dom, double Lambda,
                                                      const EnsembleConfig& cfg, const WalkerCaps& caps) {
    const auto& src = dom.source_indices();
    require(!src.empty(), ErrorKind::InvalidParam, "lattice has no source elements");
    Binning bins{Binning::Kind::Sites, 0, 0, static_cast<int>(dom.boundary_count())};
    return run_ensemble(
        [&](const RngStream& g) {
            // the emission choice uses its own child stream
            RngStream pick = g.split(2);
            const int s = src[bounded(pick.next_u32(), static_cast<int>(src.size()))];
            return run_lattice_walker(dom, dom.inward_index(s), Lambda, g, caps);
        },
        bins, cfg);
}

MeasureHistogram estimate_lattice_measure(const LatticeDomain& dom, int start_bulk, double Lambda,
                                          const EnsembleConfig& cfg, const WalkerCaps& caps) {
    Binning bins{Binning::Kind::Sites, 0, 0, static_cast<int>(dom.boundary_count())};
    return run_ensemble([&](const RngStream& g) { return run_lattice_walker(dom, start_bulk, Lambda, g, caps); },
                        bins, cfg);
}

// ---------------------------------------------------------------- stopping time

double StoppingTimeSample::median() const {
    if (total == 0) return std::numeric_limits<double>::quiet_NaN();
    const std::int64_t k = (total - 1) / 2;
    if (k >= static_cast<std::int64_t>(times.size())) return std::numeric_limits<double>::infinity();
    return times[k];
}

double StoppingTimeSample::ks_distance(const std::function<double(double)>& cdf) const {
    require(total > 0, ErrorKind::InvalidParam, "empty sample");
    const double n = static_cast<double>(total);
    double d = 1.0 - times.size() / n;  // mass the sample puts at +inf
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double F = cdf(times[i]);
        d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    return d;
}

StoppingTimeSample estimate_stopping_time(double Lambda, double a, std::int64_t n_samples, std::uint64_t seed,
                                          const WalkerCaps& caps, int threads) {
    require(Lambda > 0, ErrorKind::InvalidParam, "Lambda must be > 0");
    require(a > 0, ErrorKind::InvalidParam, "a must be > 0");
    require(n_samples >= 1, ErrorKind::InvalidParam, "n_samples must be >= 1");
    if (threads <= 0) threads = default_thread_count();
    threads = static_cast<int>(std::min<std::int64_t>(threads, n_samples));
    std::vector<double> times(n_samples, std::numeric_limits<double>::infinity());

    parallel_chunks(n_samples, threads, [&](int, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            const RngStream base(seed, static_cast<std::uint64_t>(i));
            RngStream thr = base.split(1), walk = base.split(0);
            const double chi = sample_threshold(Lambda, thr);
            // the proxy a * visits reaches chi at visit ceil(chi / a); the
            // time is the sum of that many independent excursions
            const double needed = std::ceil(chi / a);
            bool censored = needed > double(caps.max_steps);
            double steps = 0.0;
            for (double k = 0; !censored && k < needed; ++k) {
                steps += excursion_steps(walk);
                censored = steps > 1e300;
            }
            if (!censored) times[i] = steps * a * a;
        }
    });

    StoppingTimeSample out;
    out.total = n_samples;
    for (double t : times) {
        if (std::isinf(t)) ++out.censored;
        else out.times.push_back(t);
    }
    std::sort(out.times.begin(), out.times.end());
    return out;
}

}  // namespace prbm
