#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "prbm/geometry.hpp"
#include "prbm/parallel.hpp"
#include "prbm/rng.hpp"

namespace prbm {

/// Jump distance and physical length of the jump-reflected walker. The
/// reflection probability is always derived, never stored.
struct JumpParams {
    double a = 0.01;
    double Lambda = 1.0;

    double epsilon() const noexcept { return Lambda > 0 ? Lambda / (Lambda + a) : 0.0; }
    void validate() const;
};

enum class Fate { AbsorbedOnWorking, AbsorbedOnSource, Censored };

const char* to_string(Fate f) noexcept;

struct AbsorptionRecord {
    Fate fate = Fate::Censored;
    BoundaryPoint point{};       ///< valid for AbsorbedOnWorking
    int boundary_index = -1;     ///< lattice element index, -1 for canonical domains
    std::int64_t n_reflections = 0;
    std::int64_t n_hits = 0;
    double local_time_proxy = 0.0;  ///< a * n_hits
    std::int64_t steps = 0;
};

struct WalkerCaps {
    std::int64_t max_steps = 10'000'000;
    /// Lateral escape radius for the half-space; 0 selects 1e4 * Lambda.
    double escape_radius = 0.0;
};

/// Local rule: each boundary hit absorbs with probability 1 - epsilon.
/// Global rule: a geometric reflection budget N is fixed up front from the
/// same decision stream, and the walker is absorbed at hit N + 1.
enum class AbsorptionRule { Local, Global };

/// Exponential threshold with mean Lambda (0 when Lambda = 0).
double sample_threshold(double Lambda, RngStream& rng);

/// Number of failures before the first success of Bernoulli(1 - eps) trials
/// drawn from `rng`, capped at `cap`.
std::int64_t geometric_budget(double eps, RngStream& rng, std::int64_t cap);

/// Jump-reflected walker on a canonical domain. Hit positions come from
/// rng.split(0) and absorption decisions from rng.split(1), so both rules see
/// the same hit sequence.
AbsorptionRecord run_jump_walker(const DomainSpec& dom, const Vec3& start, const JumpParams& p, const RngStream& rng,
                                 const WalkerCaps& caps = {}, AbsorptionRule rule = AbsorptionRule::Local);

/// Lattice walker with partial reflections, started on a bulk site. Element b
/// reflects with probability Lambda / (Lambda + h_b), h_b its normal offset.
AbsorptionRecord run_lattice_walker(const LatticeDomain& dom, int start_bulk, double Lambda, const RngStream& rng,
                                    const WalkerCaps& caps = {});

/// Lattice walker started on a boundary element (it is hitting that element).
AbsorptionRecord run_lattice_walker_from_boundary(const LatticeDomain& dom, int b, double Lambda,
                                                  const RngStream& rng, const WalkerCaps& caps = {});

/// How AbsorbedOnWorking points are binned.
struct Binning {
    enum class Kind { Coordinate, Sites } kind = Kind::Coordinate;
    double lo = -1.0;  ///< Coordinate: range of arclength_coord
    double hi = 1.0;
    int bins = 10;     ///< Coordinate: number of bins; Sites: number of elements
};

struct MeasureHistogram {
    std::vector<double> edges;  ///< Coordinate binning only
    std::vector<std::int64_t> counts;
    std::int64_t underflow = 0;
    std::int64_t overflow = 0;
    std::int64_t total = 0;
    std::int64_t working = 0;
    std::int64_t source = 0;
    std::int64_t censored = 0;
    std::int64_t reflections_total = 0;  ///< summed over absorbed walkers

    double mean_reflections() const;

    double estimate(int bin) const;
    double stderr_of(int bin) const;
    double source_fraction() const { return total ? double(source) / total : 0.0; }
    /// Merge another histogram with identical binning.
    void merge(const MeasureHistogram& other);
};

struct EnsembleConfig {
    std::int64_t n_walkers = 1000;
    std::uint64_t seed = 1;
    int threads = 0;                 ///< 0: PRBM_THREADS or hardware concurrency
    double censored_ceiling = 0.01;  ///< fraction; exceeding it raises CensoredFractionExceeded
};

/// Runs cfg.n_walkers walkers; walker i gets RngStream(cfg.seed, i).
MeasureHistogram run_ensemble(const std::function<AbsorptionRecord(const RngStream&)>& walker, const Binning& binning,
                              const EnsembleConfig& cfg);

/// Spread harmonic measure from an interior start point of a canonical domain.
MeasureHistogram estimate_spread_measure(const DomainSpec& dom, const Vec3& start, const JumpParams& p,
                                         const Binning& binning, const EnsembleConfig& cfg,
                                         const WalkerCaps& caps = {}, AbsorptionRule rule = AbsorptionRule::Local);

/// Lattice absorption histogram (per element) for walkers emitted uniformly
/// from the inward neighbours of the Source elements.
MeasureHistogram estimate_lattice_measure_from_source(const LatticeDomain& dom, double Lambda,
                                                      const EnsembleConfig& cfg, const WalkerCaps& caps = {});

/// Lattice absorption histogram for walkers started on one bulk site.
MeasureHistogram estimate_lattice_measure(const LatticeDomain& dom, int start_bulk, double Lambda,
                                          const EnsembleConfig& cfg, const WalkerCaps& caps = {});

/// Empirical law of the local-time stopping time of the one-dimensional
/// reflected walk with mesh a (time step a^2).
struct StoppingTimeSample {
    std::vector<double> times;  ///< sorted, uncensored samples
    std::int64_t censored = 0;
    std::int64_t total = 0;

    double median() const;
    /// sup |F_emp - F| with censored samples placed beyond every finite time.
    double ks_distance(const std::function<double(double)>& cdf) const;
};

StoppingTimeSample estimate_stopping_time(double Lambda, double a, std::int64_t n_samples, std::uint64_t seed,
                                          const WalkerCaps& caps = {}, int threads = 0);


}  // namespace prbm
