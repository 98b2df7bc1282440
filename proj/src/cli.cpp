#include "prbm/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "prbm/dtn.hpp"
#include "prbm/error.hpp"
#include "prbm/fixtures.hpp"
#include "prbm/halfspace.hpp"
#include "prbm/lsa.hpp"
#include "prbm/spectral.hpp"
#include "prbm/walkers.hpp"

#ifndef PRBM_VERSION
#define PRBM_VERSION "0.0.0"
#endif

namespace prbm::cli {

using nlohmann::json;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::vector<double> parse_grid(const std::string& spec) {
    auto number = [&](const std::string& s) {
        double v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorKind::InvalidParam,
                "bad number '" + s + "' in grid '" + spec + "'");
        return v;
    };
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string tok; std::getline(ss, tok, spec.rfind("log:", 0) == 0 || spec.rfind("lin:", 0) == 0 ? ':' : ',');)
        parts.push_back(tok);
    std::vector<double> out;
    if (!parts.empty() && (parts[0] == "log" || parts[0] == "lin")) {
        require(parts.size() == 4, ErrorKind::InvalidParam, "grid '" + spec + "' must read kind:lo:hi:n");
        const double lo = number(parts[1]), hi = number(parts[2]);
        const double n = number(parts[3]);
        require(n >= 1 && n == std::floor(n), ErrorKind::InvalidParam, "grid point count must be a positive integer");
        const bool log = parts[0] == "log";
        require(!log || (lo > 0 && hi > 0), ErrorKind::InvalidParam, "log grid needs positive bounds");
        for (int k = 0; k < int(n); ++k) {
            const double t = n > 1 ? double(k) / (n - 1) : 0.0;
            out.push_back(log ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo));
        }
    } else {
        for (const auto& p : parts) out.push_back(number(p));
    }
    require(!out.empty(), ErrorKind::InvalidParam, "empty grid");
    return out;
}

namespace {

// ------------------------------------------------------------------ plumbing

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Csv {
public:
    explicit Csv(std::ostream& os) : os_(os) {}
    Csv& header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) os_ << (i ? "," : "") << cols[i];
        os_ << '\n';
        return *this;
    }
    template <class... T>
    void row(const T&... v) {
        bool first = true;
        ((os_ << (first ? "" : ",") << cell(v), first = false), ...);
        os_ << '\n';
    }

private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(std::int64_t v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }
    std::ostream& os_;
};

/// Output sink: a file, or the caller's stream for "-".
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (path.empty() || path == "-") {
            os_ = &fallback;
        } else {
            file_ = std::make_unique<std::ofstream>(path);
            require(bool(*file_), ErrorKind::Io, "cannot open '" + path + "' for writing");
            os_ = file_.get();
        }
    }
    std::ostream& stream() { return *os_; }
    void close(const std::string& path) {
        if (file_) {
            file_->close();
            require(!file_->fail(), ErrorKind::Io, "write failed for '" + path + "'");
        }
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_ = nullptr;
};

struct Binding {
    CLI::Option* opt;
    std::function<void(const json&)> set;
    std::function<json()> get;
};

struct Run {
    std::ostream& out;
    std::ostream& err;
    json results = json::object();
    std::vector<std::string> outputs;
};

/// One subcommand: its options, the config-file keys they accept and the
/// action that consumes them.
class Command {
public:
    Command(CLI::App& parent, const std::string& name, const std::string& help)
        : app_(parent.add_subcommand(name, help)), name_(name) {
        app_->add_option("--config", config_, "JSON file with option values (flags take precedence)");
        app_->add_option("--manifest", manifest_, "Run manifest path (default: <out>.manifest.json or prbm-" + name + ".manifest.json)");
    }

    template <class T>
    CLI::Option* bind(const std::string& key, T& var, const std::string& help) {
        CLI::Option* o = app_->add_option("--" + key, var, help)->capture_default_str();
        keys_[key] = {o, [&var](const json& j) { var = j.get<T>(); }, [&var] { return json(var); }};
        return o;
    }
    CLI::Option* flag(const std::string& key, bool& var, const std::string& help) {
        CLI::Option* o = app_->add_flag("--" + key, var, help);
        keys_[key] = {o, [&var](const json& j) { var = j.get<bool>(); }, [&var] { return json(var); }};
        return o;
    }

    CLI::App* app() const { return app_; }
    const std::string& name() const { return name_; }
    std::function<void(Run&)> action;

    /// Fills options absent from the command line from the config file.
    void apply_config() {
        if (config_.empty()) return;
        std::ifstream in(config_);
        if (!in) throw UsageError("cannot read config file '" + config_ + "'");
        json cfg;
        try {
            cfg = json::parse(in);
        } catch (const json::exception& e) {
            throw UsageError("config file '" + config_ + "' is not valid JSON: " + e.what());
        }
        if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
        for (const auto& [key, value] : cfg.items()) {
            auto it = keys_.find(key);
            if (it == keys_.end()) throw UsageError("unknown config key '" + key + "' for " + name_);
            if (it->second.opt->count() > 0) continue;
            try {
                it->second.set(value);
            } catch (const json::exception& e) {
                throw UsageError("config key '" + key + "' has the wrong type: " + e.what());
            }
        }
    }

    json resolved() const {
        json j = json::object();
        for (const auto& [key, b] : keys_) j[key] = b.get();
        return j;
    }

    std::string manifest_path(const std::string& out) const {
        if (!manifest_.empty()) return manifest_;
        if (!out.empty() && out != "-") return out + ".manifest.json";
        return "prbm-" + name_ + ".manifest.json";
    }

    std::string out_path;  ///< bound by subcommands that write files

private:
    CLI::App* app_;
    std::string name_;
    std::string config_;
    std::string manifest_;
    std::map<std::string, Binding> keys_;
};

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Vec3 to_vec3(const std::vector<double>& v) {
    require(v.size() <= 3, ErrorKind::InvalidParam, "points have at most three coordinates");
    Vec3 x{0, 0, 0};
    for (std::size_t i = 0; i < v.size(); ++i) x[i] = v[i];
    return x;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    require(bool(in), ErrorKind::Io, "cannot read '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::Io, "'" + path + "' is not valid JSON: " + e.what());
    }
}

LatticeDomain load_lattice(const std::string& file, const std::string& fixture) {
    require(file.empty() != fixture.empty(), ErrorKind::InvalidParam, "give exactly one of --domain-file and --fixture");
    if (!file.empty()) return lattice_from_json(read_json_file(file));
    for (auto& [name, dom] : fixtures::bundled())
        if (name == fixture) return dom;
    std::string names;
    for (auto& [name, dom] : fixtures::bundled()) names += " " + name;
    fail(ErrorKind::InvalidParam, "unknown fixture '" + fixture + "'; bundled:" + names);
}

std::vector<Polyline> polylines(const json& j) {
    // a single polyline is an array of points; a list is an array of those
    if (j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_array()) {
        std::vector<Polyline> out;
        for (const auto& p : j) out.push_back(Polyline{polyline_from_json(p)});
        return out;
    }
    return {Polyline{polyline_from_json(j)}};
}

// ------------------------------------------------------------- subcommands

void add_halfspace(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto c = std::make_unique<Command>(app, "halfspace", "Planar-interface laws: stopping time, spread kernel, absorption probability");
    struct Opts {
        double lambda = 1.0;
        int d = 2;
        bool prob = false;
        double ratio = 0.5;
        std::string table = "stopping";
        int points = 201;
        double range = 5.0;
        double rel_tol = 1e-9;
    };
    auto o = std::make_shared<Opts>();
    c->bind("lambda", o->lambda, "Physical length Lambda > 0");
    c->bind("d", o->d, "Space dimension")->check(CLI::Range(2, 3));
    c->flag("prob", o->prob, "Print P_Lambda for a disk of radius ratio*Lambda and exit");
    c->bind("ratio", o->ratio, "Disk radius over Lambda for --prob");
    c->bind("table", o->table, "Table: stopping (t, rho), kernel (s, t_Lambda) or absorption (r/Lambda, P)")
        ->check(CLI::IsMember({"stopping", "kernel", "absorption"}));
    c->bind("points", o->points, "Rows in the table")->check(CLI::PositiveNumber);
    c->bind("range", o->range, "Abscissa range in units of Lambda (Lambda^2 for time)");
    c->bind("rel-tol", o->rel_tol, "Relative quadrature tolerance");
    c->bind("out", c->out_path, "Output file, '-' for stdout");
    c->action = [o, cmd = c.get()](Run& run) {
        require(o->lambda > 0, ErrorKind::InvalidParam, "--lambda must be > 0");
        QuadratureConfig q;
        q.rel_tol = o->rel_tol;
        Sink sink(cmd->out_path, run.out);
        std::ostream& os = sink.stream();
        if (o->prob) {
            const double P = absorption_probability_disk(o->ratio * o->lambda, o->lambda, o->d, q);
            os << format_double(P) << '\n';
            run.results["P"] = P;
        } else {
            json meta{{"table", o->table}, {"lambda", o->lambda}, {"d", o->d}, {"points", o->points}, {"range", o->range}};
            os << "# " << meta.dump() << '\n';
            Csv csv(os);
            const double L = o->lambda;
            if (o->table == "stopping") {
                csv.header({"t", "rho", "cdf"});
                for (int k = 0; k < o->points; ++k) {
                    const double t = o->points > 1 ? o->range * L * L * k / (o->points - 1) : 0.0;
                    csv.row(t, stopping_time_density(t, L), stopping_time_cdf(t, L, q));
                }
            } else if (o->table == "kernel") {
                csv.header({"s", "t_lambda"});
                for (int k = 1; k <= o->points; ++k) {
                    const double s = o->range * L * k / o->points;
                    csv.row(s, spread_kernel_t(s, L, o->d, q));
                }
            } else {
                csv.header({"r_over_lambda", "P"});
                for (int k = 1; k <= o->points; ++k) {
                    const double r = o->range * k / o->points;
                    csv.row(r, absorption_probability_disk(r * L, L, o->d, q));
                }
            }
            run.results["rows"] = o->points;
        }
        sink.close(cmd->out_path);
        if (cmd->out_path != "-" && !cmd->out_path.empty()) run.outputs.push_back(cmd->out_path);
    };
    cmds.push_back(std::move(c));
}

void add_simulate(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto c = std::make_unique<Command>(app, "simulate", "Monte Carlo spread harmonic measure");
    struct Opts {
        std::string domain = "halfspace";
        std::string domain_file;
        int dim = 0;
        double lambda = 1.0;
        double jump = 0.01;
        std::int64_t walkers = 100000;
        std::uint64_t seed = 1;
        int bins = 20;
        double lo = NAN, hi = NAN;
        std::vector<double> start;
        double outer_radius = 3.0;
        std::string rule = "local";
        std::int64_t max_steps = 10'000'000;
        double escape_radius = 0.0;
        double censored_ceiling = 0.01;
    };
    auto o = std::make_shared<Opts>();
    c->bind("domain", o->domain, "halfspace | disk | disk-exterior | ball | ball-exterior | annulus | lattice")
        ->check(CLI::IsMember({"halfspace", "halfplane", "disk", "disk-exterior", "ball", "ball-exterior", "annulus", "lattice"}));
    c->bind("domain-file", o->domain_file, "LatticeDomain JSON for --domain lattice");
    c->bind("dim", o->dim, "Dimension for halfspace (2 or 3)");
    c->bind("lambda", o->lambda, "Physical length Lambda >= 0");
    c->bind("jump", o->jump, "Jump distance a (ignored on lattices, which use the mesh)");
    c->bind("walkers", o->walkers, "Number of walkers")->check(CLI::PositiveNumber);
    c->bind("seed", o->seed, "Base seed; walker i uses stream i");
    c->bind("bins", o->bins, "Histogram bins")->check(CLI::PositiveNumber);
    c->bind("lo", o->lo, "Lower edge of the binned coordinate (default depends on the domain)");
    c->bind("hi", o->hi, "Upper edge of the binned coordinate");
    c->bind("start", o->start, "Start point coordinates (default depends on the domain)")->expected(1, 3);
    c->bind("outer-radius", o->outer_radius, "Annulus source radius R");
    c->bind("rule", o->rule, "Absorption rule: local | global")->check(CLI::IsMember({"local", "global"}));
    c->bind("max-steps", o->max_steps, "Per-walker step cap");
    c->bind("escape-radius", o->escape_radius, "Half-space escape radius (0: 1e4 * max(Lambda, a))");
    c->bind("censored-ceiling", o->censored_ceiling, "Maximum censored fraction before failing");
    c->bind("out", c->out_path, "Output CSV, '-' for stdout");
    c->action = [o, cmd = c.get()](Run& run) {
        EnsembleConfig cfg{o->walkers, o->seed, 0, o->censored_ceiling};
        WalkerCaps caps{o->max_steps, o->escape_radius};
        const auto t0 = std::chrono::steady_clock::now();
        MeasureHistogram h;
        std::vector<std::string> labels;
        if (o->domain == "lattice") {
            require(!o->domain_file.empty(), ErrorKind::InvalidParam, "--domain lattice needs --domain-file");
            const LatticeDomain dom = lattice_from_json(read_json_file(o->domain_file));
            h = estimate_lattice_measure_from_source(dom, o->lambda, cfg, caps);
        } else {
            const DomainKind kind = domain_kind_from_string(o->domain);
            const DomainSpec dom = make_canonical(kind, {o->dim, o->outer_radius});
            Vec3 start{};
            if (!o->start.empty()) {
                start = to_vec3(o->start);
            } else {
                switch (kind) {
                    case DomainKind::HalfSpace: start[dom.dimension - 1] = o->jump; break;
                    case DomainKind::DiskExterior:
                    case DomainKind::BallExterior: start[0] = 2.0; break;
                    case DomainKind::Annulus: start[0] = std::sqrt(o->outer_radius); break;
                    default: break;
                }
            }
            double lo = o->lo, hi = o->hi;
            if (std::isnan(lo) || std::isnan(hi)) {
                double dlo = 0, dhi = 2 * M_PI;
                if (kind == DomainKind::HalfSpace) {
                    dhi = 5 * std::max(o->lambda, o->jump);
                    dlo = dom.dimension == 2 ? -dhi : 0.0;
                } else if (kind == DomainKind::BallInterior || kind == DomainKind::BallExterior) {
                    dhi = M_PI;
                }
                if (std::isnan(lo)) lo = dlo;
                if (std::isnan(hi)) hi = dhi;
            }
            require(hi > lo, ErrorKind::InvalidParam, "--hi must exceed --lo");
            const AbsorptionRule rule = o->rule == "global" ? AbsorptionRule::Global : AbsorptionRule::Local;
            h = estimate_spread_measure(dom, start, {o->jump, o->lambda}, {Binning::Kind::Coordinate, lo, hi, o->bins},
                                        cfg, caps, rule);
            run.results["start"] = {start[0], start[1], start[2]};
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        Sink sink(cmd->out_path, run.out);
        Csv csv(sink.stream());
        if (h.edges.empty()) {
            csv.header({"element", "count", "estimate", "stderr"});
            for (int k = 0; k < int(h.counts.size()); ++k) csv.row(k, h.counts[k], h.estimate(k), h.stderr_of(k));
        } else {
            csv.header({"bin", "lo", "hi", "count", "estimate", "stderr"});
            for (int k = 0; k < int(h.counts.size()); ++k)
                csv.row(k, h.edges[k], h.edges[k + 1], h.counts[k], h.estimate(k), h.stderr_of(k));
        }
        sink.close(cmd->out_path);
        if (cmd->out_path != "-" && !cmd->out_path.empty()) run.outputs.push_back(cmd->out_path);
        run.results.update({{"total", h.total},
                            {"working", h.working},
                            {"source", h.source},
                            {"censored", h.censored},
                            {"underflow", h.underflow},
                            {"overflow", h.overflow},
                            {"mean_reflections", h.mean_reflections()},
                            {"simulation_wall_time_s", wall}});
    };
    cmds.push_back(std::move(c));
}

void add_spectrum(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto c = std::make_unique<Command>(app, "spectrum", "Analytic Dirichlet-to-Neumann spectra");
    struct Opts {
        std::string domain = "disk";
        int modes = 10;
        int dim = 3;
        double outer_radius = 3.0;
    };
    auto o = std::make_shared<Opts>();
    c->bind("domain", o->domain, "disk | disk-exterior | ball | ball-exterior | annulus")
        ->check(CLI::IsMember({"disk", "disk-exterior", "ball", "ball-exterior", "annulus"}));
    c->bind("modes", o->modes, "Highest mode index")->check(CLI::NonNegativeNumber);
    c->bind("dim", o->dim, "Ball dimension");
    c->bind("outer-radius", o->outer_radius, "Annulus source radius R");
    c->bind("out", c->out_path, "Output CSV, '-' for stdout");
    c->action = [o, cmd = c.get()](Run& run) {
        AnalyticSpectrum s;
        if (o->domain == "disk") s = disk_spectrum(o->modes, false);
        else if (o->domain == "disk-exterior") s = disk_spectrum(o->modes, true);
        else if (o->domain == "ball") s = ball_spectrum(o->modes, BallSide::Interior, o->dim);
        else if (o->domain == "ball-exterior") s = ball_spectrum(o->modes, BallSide::Exterior, o->dim);
        else s = annulus_spectrum(o->outer_radius, o->modes);
        Sink sink(cmd->out_path, run.out);
        Csv csv(sink.stream());
        csv.header({"index", "mu", "degeneracy"});
        for (const auto& m : s.modes) csv.row(m.index, m.mu, m.degeneracy);
        sink.close(cmd->out_path);
        if (cmd->out_path != "-" && !cmd->out_path.empty()) run.outputs.push_back(cmd->out_path);
        run.results["modes"] = s.modes.size();
    };
    cmds.push_back(std::move(c));
}

void add_impedance(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto c = std::make_unique<Command>(app, "impedance", "Spectroscopic impedance over a log-spaced Lambda grid");
    struct Opts {
        std::string domain = "annulus";
        std::string domain_file;
        std::string fixture;
        double outer_radius = 3.0;
        double lambda_min = 1e-2, lambda_max = 1e2;
        int points = 41;
        double D = 1.0;
    };
    auto o = std::make_shared<Opts>();
    c->bind("domain", o->domain, "annulus (closed form) | lattice")->check(CLI::IsMember({"annulus", "lattice"}));
    c->bind("domain-file", o->domain_file, "LatticeDomain JSON for --domain lattice");
    c->bind("fixture", o->fixture, "Bundled lattice fixture for --domain lattice");
    c->bind("outer-radius", o->outer_radius, "Annulus source radius R");
    c->bind("lambda-min", o->lambda_min, "Smallest Lambda");
    c->bind("lambda-max", o->lambda_max, "Largest Lambda");
    c->bind("points", o->points, "Grid points")->check(CLI::PositiveNumber);
    c->bind("D", o->D, "Diffusion coefficient");
    c->bind("out", c->out_path, "Output CSV, '-' for stdout");
    c->action = [o, cmd = c.get()](Run& run) {
        require(o->D > 0, ErrorKind::InvalidParam, "--D must be > 0");
        const auto grid = parse_grid("log:" + format_double(o->lambda_min) + ":" + format_double(o->lambda_max) + ":" +
                                     std::to_string(o->points));
        std::vector<std::array<double, 3>> rows;
        if (o->domain == "annulus") {
            // a uniform flux loads only the rotationally symmetric mode
            const auto s = annulus_spectrum(o->outer_radius, 0);
            const std::vector<double> mu{s.modes[0].mu}, F{1 / (2 * M_PI)};
            const double Z0 = annulus_cell_impedance0(o->outer_radius, o->D);
            for (double L : grid) {
                const auto v = impedance_from_spectrum(mu, F, L, o->D, Z0);
                rows.push_back({L, v.Z, v.Z_sp});
            }
            run.results["Z_cell0"] = Z0;
        } else {
            const LatticeDomain dom = load_lattice(o->domain_file, o->fixture);
            const auto M = build_M(build_Q(dom));
            const auto spec = spectrum(M, hitting_distribution(dom).density);
            for (const auto& p : impedance_curve(M, spec, grid, o->D)) rows.push_back({p.Lambda, p.Z, p.Z_sp});
            run.results["Z_cell0"] = 1.0 / total_flux(M, 0.0, o->D);
        }
        Sink sink(cmd->out_path, run.out);
        Csv csv(sink.stream());
        csv.header({"Lambda", "Z", "Z_sp"});
        for (const auto& r : rows) csv.row(r[0], r[1], r[2]);
        sink.close(cmd->out_path);
        if (cmd->out_path != "-" && !cmd->out_path.empty()) run.outputs.push_back(cmd->out_path);
    };
    cmds.push_back(std::move(c));
}

void add_dtn(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto c = std::make_unique<Command>(app, "dtn", "Discrete self-transport, Dirichlet-to-Neumann spectrum and impedance of a lattice");
    struct Opts {
        std::string domain_file;
        std::string fixture;
        std::string lambda_grid = "log:1e-2:1e2:21";
        double D = 1.0;
        bool dump = false;
    };
    auto o = std::make_shared<Opts>();
    c->bind("domain-file", o->domain_file, "LatticeDomain JSON");
    c->bind("fixture", o->fixture, "Bundled lattice fixture name instead of a file");
    c->bind("lambda-grid", o->lambda_grid, "log:lo:hi:n, lin:lo:hi:n or a comma list");
    c->bind("D", o->D, "Diffusion coefficient");
    c->flag("dump-matrices", o->dump, "Also write Q and M as float64 binaries with JSON sidecars");
    c->bind("out", c->out_path, "Output prefix; writes <out>.spectrum.csv and <out>.impedance.csv")->required();
    c->action = [o, cmd = c.get()](Run& run) {
        const LatticeDomain dom = load_lattice(o->domain_file, o->fixture);
        const auto grid = parse_grid(o->lambda_grid);
        const auto Qm = build_Q(dom);
        const auto M = build_M(Qm);
        const bool has_source = !dom.source_indices().empty();
        const auto spec = has_source ? spectrum(M, hitting_distribution(dom).density) : spectrum(M);
        const std::string prefix = cmd->out_path;

        {
            const std::string path = prefix + ".spectrum.csv";
            Sink sink(path, run.out);
            Csv csv(sink.stream());
            csv.header({"alpha", "mu", "F"});
            for (Eigen::Index k = 0; k < spec.mu.size(); ++k)
                csv.row(int(k), spec.mu[k], has_source ? spec.F[k] : NAN);
            sink.close(path);
            run.outputs.push_back(path);
        }
        if (has_source) {
            const std::string path = prefix + ".impedance.csv";
            Sink sink(path, run.out);
            Csv csv(sink.stream());
            csv.header({"Lambda", "Z", "Z_cell", "Z_sp", "Z_sp_difference"});
            for (const auto& p : impedance_curve(M, spec, grid, o->D)) csv.row(p.Lambda, p.Z, p.Z_cell, p.Z_sp, p.Z_sp_difference);
            sink.close(path);
            run.outputs.push_back(path);
        } else {
            run.results["note"] = "no Source elements: impedance is undefined and F is left as nan";
        }
        if (o->dump) {
            dump_matrix(prefix + ".Q.bin", Qm.Q, "Q");
            dump_matrix(prefix + ".M.bin", M.matrix(), "M");
            for (const char* n : {".Q.bin", ".Q.bin.json", ".M.bin", ".M.bin.json"}) run.outputs.push_back(prefix + n);
        }
        run.results.update({{"working_elements", Qm.size()},
                            {"bulk_sites", dom.bulk_count()},
                            {"max_asymmetry", (Qm.Q - Qm.Q.transpose()).cwiseAbs().maxCoeff()},
                            {"max_row_sum", Qm.Q.rowwise().sum().maxCoeff()}});
    };
    cmds.push_back(std::move(c));
}

void add_lsa(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto c = std::make_unique<Command>(app, "lsa", "Land Surveyor Approximation: chord coarse-graining against the mixed-condition flux");
    struct Opts {
        std::string curve;
        double lambda = 0.25;
        double mesh = 0.0;
        double D = 1.0;
    };
    auto o = std::make_shared<Opts>();
    c->bind("curve", o->curve, "JSON {working: [[x,y],...], source: polyline(s), walls: polyline(s)}")->required();
    c->bind("lambda", o->lambda, "Physical length Lambda > 0");
    c->bind("mesh", o->mesh, "Lattice mesh a <= Lambda/10 (0: Lambda/10)");
    c->bind("D", o->D, "Diffusion coefficient");
    c->bind("out", c->out_path, "Report JSON, '-' for stdout");
    c->action = [o, cmd = c.get()](Run& run) {
        const json j = read_json_file(o->curve);
        require(j.is_object() && j.contains("working") && j.contains("source"), ErrorKind::Io,
                "curve file needs 'working' and 'source' entries");
        LsaProblem p;
        p.working = Polyline{polyline_from_json(j.at("working"))};
        p.source = polylines(j.at("source"));
        if (j.contains("walls")) p.walls = polylines(j.at("walls"));
        else if (j.contains("reflecting")) p.walls = polylines(j.at("reflecting"));
        const double a = o->mesh > 0 ? o->mesh : o->lambda / 10;
        const auto r = compare_flux(p, o->lambda, a, o->D);
        Sink sink(cmd->out_path, run.out);
        sink.stream() << r.to_json().dump(2) << '\n';
        sink.close(cmd->out_path);
        if (cmd->out_path != "-" && !cmd->out_path.empty()) run.outputs.push_back(cmd->out_path);
        run.results = r.to_json();
    };
    cmds.push_back(std::move(c));
}

// ------------------------------------------------------------------ validate

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<Check> run_validation() {
    std::vector<Check> out;
    auto add = [&](const std::string& name, auto&& body) {
        try {
            auto [ok, detail] = body();
            out.push_back({name, ok, detail});
        } catch (const std::exception& e) {
            out.push_back({name, false, std::string("threw ") + e.what()});
        }
    };
    auto near = [](double x, double ref, double tol) { return std::abs(x - ref) <= tol; };

    add("halfspace P(Lambda/2), d=2 is 0.4521", [&] {
        const double P = absorption_probability_disk(0.5, 1.0, 2);
        return std::pair{near(P, 0.4521, 5e-4), "P=" + format_double(P)};
    });
    add("halfspace P(Lambda), d=3 is 0.4611", [&] {
        const double P = absorption_probability_disk(1.0, 1.0, 3);
        return std::pair{near(P, 0.4611, 5e-4), "P=" + format_double(P)};
    });
    add("stopping-time density integrates to 1", [&] {
        const double m = integrate_to_infinity([](double t) { return stopping_time_density(t, 1.0); }, 0.0).value;
        return std::pair{near(m, 1.0, 1e-6), "mass=" + format_double(m)};
    });
    add("disk spread density integrates to 1", [&] {
        const double m = integrate([](double t) { return disk_spread_density(0.5, t, 0.3); }, -M_PI, M_PI).value;
        return std::pair{near(m, 1.0, 1e-6), "mass=" + format_double(m)};
    });
    add("annulus closed form Z_sp = Lambda/(2 pi D)", [&] {
        const auto s = annulus_spectrum(3.0, 0);
        double worst = 0;
        for (double L : parse_grid("log:1e-2:1e2:9")) {
            const auto v = impedance_from_spectrum({s.modes[0].mu}, {1 / (2 * M_PI)}, L, 1.0, annulus_cell_impedance0(3.0, 1.0));
            worst = std::max(worst, std::abs(v.Z_sp / (L / (2 * M_PI)) - 1));
        }
        return std::pair{worst < 1e-10, "max rel dev=" + format_double(worst)};
    });
    add("lattice annulus (a=1/64) Z_sp within 5% of Lambda/(2 pi D)", [&] {
        const auto dom = fixtures::annulus(3.0, 1.0 / 64);
        const auto M = build_M(build_Q(dom));
        const auto spec = spectrum(M, hitting_distribution(dom).density);
        double worst = 0, identity = 0;
        for (const auto& p : impedance_curve(M, spec, parse_grid("log:1e-2:1e2:9"), 1.0, 1e-8)) {
            worst = std::max(worst, std::abs(p.Z_sp / (p.Lambda / (2 * M_PI)) - 1));
            identity = std::max(identity, std::abs(p.Z_sp / p.Z_sp_difference - 1));
        }
        return std::pair{worst < 0.05 && identity < 1e-8,
                         "max rel dev=" + format_double(worst) + " identity=" + format_double(identity)};
    });
    add("Q symmetric and (sub)stochastic on bundled fixtures", [&] {
        double asym = 0;
        bool rows_ok = true;
        for (const auto& [name, dom] : fixtures::bundled()) {
            const auto Qm = build_Q(dom);
            asym = std::max(asym, (Qm.Q - Qm.Q.transpose()).cwiseAbs().maxCoeff());
            const Eigen::VectorXd rs = Qm.Q.rowwise().sum();
            rows_ok &= dom.source_indices().empty() ? (rs.array() - 1).abs().maxCoeff() < 1e-10 : rs.maxCoeff() < 1;
        }
        return std::pair{asym < 1e-12 && rows_ok, "max asymmetry=" + format_double(asym)};
    });
    add("lattice P_Lambda equals P_0 at Lambda=0", [&] {
        const auto dom = fixtures::source_box(16);
        const auto M = build_M(build_Q(dom));
        const auto P0 = hitting_distribution(dom);
        const auto PL = absorption_distribution(P0, spreading_operator(M, 0.0), M);
        return std::pair{PL.P == P0.P, std::string("exact comparison")};
    });
    return out;
}

void add_validate(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds) {
    auto c = std::make_unique<Command>(app, "validate", "Run the bundled cross-checks and print PASS/FAIL per check");
    c->action = [](Run& run) {
        const auto checks = run_validation();
        int failed = 0;
        json list = json::array();
        for (const auto& ch : checks) {
            run.out << (ch.pass ? "PASS " : "FAIL ") << ch.name << " (" << ch.detail << ")\n";
            failed += !ch.pass;
            list.push_back({{"name", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
        }
        run.results["checks"] = list;
        run.results["failed"] = failed;
        require(failed == 0, ErrorKind::SolveFailure, std::to_string(failed) + " validation check(s) failed");
    };
    cmds.push_back(std::move(c));
}

int execute(Command& cmd, std::ostream& out, std::ostream& err) {
    Run run{out, err, json::object(), {}};
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    int code = 0;
    json error = nullptr;
    try {
        cmd.action(run);
    } catch (const Error& e) {
        code = 1;
        error = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
        err << "prbm " << cmd.name() << ": " << e.what() << '\n';
    } catch (const std::exception& e) {
        code = 1;
        error = {{"kind", "Internal"}, {"message", e.what()}};
        err << "prbm " << cmd.name() << ": " << e.what() << '\n';
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest{{"tool", "prbm"},
                  {"version", PRBM_VERSION},
                  {"subcommand", cmd.name()},
                  {"config", cmd.resolved()},
                  {"threads", default_thread_count()},
                  {"started_at", started},
                  {"wall_time_s", wall},
                  {"status", code == 0 ? "ok" : "error"},
                  {"exit_code", code},
                  {"error", error},
                  {"outputs", run.outputs},
                  {"results", run.results}};
    const std::string path = cmd.manifest_path(cmd.out_path);
    std::ofstream mf(path);
    if (mf) {
        mf << manifest.dump(2) << '\n';
    } else {
        err << "prbm " << cmd.name() << ": cannot write manifest '" << path << "'\n";
        if (code == 0) code = 1;
    }
    return code;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"prbm: partially reflected Brownian motion toolkit"};
    app.name("prbm");
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", PRBM_VERSION);
    std::vector<std::unique_ptr<Command>> cmds;
    add_halfspace(app, cmds);
    add_simulate(app, cmds);
    add_spectrum(app, cmds);
    add_impedance(app, cmds);
    add_dtn(app, cmds);
    add_lsa(app, cmds);
    add_validate(app, cmds);

    Command* chosen = nullptr;
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
        for (auto& c : cmds)
            if (c->app()->parsed()) chosen = c.get();
        if (!chosen) throw UsageError("no subcommand given");
        chosen->apply_config();
    } catch (const CLI::CallForHelp&) {
        CLI::App* target = &app;
        for (auto& c : cmds)
            if (c->app()->parsed()) target = c->app();
        out << target->help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << PRBM_VERSION << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        CLI::App* target = &app;
        for (auto& c : cmds)
            if (c->app()->parsed()) target = c->app();
        err << "prbm: " << e.what() << "\n\n" << target->help();
        return 2;
    } catch (const UsageError& e) {
        err << "prbm: " << e.what() << "\n\n" << (chosen ? chosen->app()->help() : app.help());
        return 2;
    }
    return execute(*chosen, out, err);
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args, out, err);
}

}  // namespace prbm::cli
