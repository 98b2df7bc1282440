#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "prbm/cli.hpp"
#include "prbm/dtn.hpp"
#include "prbm/error.hpp"
#include "prbm/fixtures.hpp"
#include "prbm/halfspace.hpp"
#include "prbm/lsa.hpp"
#include "prbm/spectral.hpp"
#include "prbm/walkers.hpp"

namespace py = pybind11;
using namespace prbm;

namespace {

LatticeDomain lattice(const std::string& fixture, const std::string& json_text) {
    if (!json_text.empty()) return lattice_from_json(nlohmann::json::parse(json_text));
    for (auto& [name, dom] : fixtures::bundled())
        if (name == fixture) return dom;
    throw Error(ErrorKind::InvalidParam, "unknown fixture '" + fixture + "'");
}

Polyline to_polyline(const std::vector<std::array<double, 2>>& pts) {
    Polyline p;
    for (const auto& q : pts) p.points.push_back({q[0], q[1]});
    return p;
}

py::dict histogram_dict(const MeasureHistogram& h) {
    py::dict d;
    d["edges"] = h.edges;
    d["counts"] = h.counts;
    std::vector<double> est, err;
    for (int k = 0; k < int(h.counts.size()); ++k) {
        est.push_back(h.estimate(k));
        err.push_back(h.stderr_of(k));
    }
    d["estimate"] = est;
    d["stderr"] = err;
    d["total"] = h.total;
    d["working"] = h.working;
    d["source"] = h.source;
    d["censored"] = h.censored;
    d["underflow"] = h.underflow;
    d["overflow"] = h.overflow;
    d["mean_reflections"] = h.mean_reflections();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Partially reflected Brownian motion: analytic laws, walkers and lattice operators";

    static py::exception<Error> exc(m, "PrbmError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = exc;
            py::object inst = err(e.what());
            inst.attr("kind") = std::string(to_string(e.kind()));
            PyErr_SetObject(err.ptr(), inst.ptr());
        }
    });

    // half-space laws
    m.def("stopping_time_density", &stopping_time_density, py::arg("t"), py::arg("Lambda"));
    m.def("stopping_time_cdf", [](double t, double L) { return stopping_time_cdf(t, L); }, py::arg("t"), py::arg("Lambda"));
    m.def("spread_kernel", [](double s, double L, int d) { return spread_kernel_t(s, L, d); }, py::arg("s"),
          py::arg("Lambda"), py::arg("d") = 2);
    m.def("absorption_probability_disk", [](double r, double L, int d) { return absorption_probability_disk(r, L, d); },
          py::arg("r"), py::arg("Lambda"), py::arg("d") = 2,
          "Probability of absorption within lateral distance r of the release point on a flat boundary.");
    m.def("spread_density_halfplane",
          [](double x, double y, double s, double L) { return spread_density_halfspace({x, y}, {s}, L); }, py::arg("x"),
          py::arg("y"), py::arg("s"), py::arg("Lambda"));

    // disk and ball
    m.def("poisson_kernel_disk", &poisson_kernel_disk, py::arg("r"), py::arg("theta"));
    m.def("disk_spread_density", [](double r, double th, double L) { return disk_spread_density(r, th, L); },
          py::arg("r"), py::arg("theta"), py::arg("Lambda"));
    m.def("ball_spread_density", [](double r, double th, double L) { return ball_spread_density(r, th, L); },
          py::arg("r"), py::arg("theta"), py::arg("Lambda"));
    m.def(
        "analytic_spectrum",
        [](const std::string& domain, int modes, double outer_radius, int dim) {
            AnalyticSpectrum s;
            if (domain == "disk") s = disk_spectrum(modes, false);
            else if (domain == "disk-exterior") s = disk_spectrum(modes, true);
            else if (domain == "ball") s = ball_spectrum(modes, BallSide::Interior, dim);
            else if (domain == "ball-exterior") s = ball_spectrum(modes, BallSide::Exterior, dim);
            else if (domain == "annulus") s = annulus_spectrum(outer_radius, modes);
            else throw Error(ErrorKind::InvalidParam, "unknown domain '" + domain + "'");
            std::vector<std::tuple<int, double, std::int64_t>> out;
            for (const auto& md : s.modes) out.emplace_back(md.index, md.mu, md.degeneracy);
            return out;
        },
        py::arg("domain"), py::arg("modes") = 10, py::arg("outer_radius") = 3.0, py::arg("dim") = 3,
        "List of (index, mu, degeneracy).");
    m.def(
        "annulus_impedance",
        [](double R, double L, double D) {
            const auto s = annulus_spectrum(R, 0);
            const auto v = impedance_from_spectrum({s.modes[0].mu}, {1 / (2 * M_PI)}, L, D, annulus_cell_impedance0(R, D));
            return py::make_tuple(v.Z, v.Z_sp);
        },
        py::arg("R"), py::arg("Lambda"), py::arg("D") = 1.0, "(Z, Z_sp) of the annulus with a uniform flux.");

    // walkers
    m.def(
        "simulate",
        [](const std::string& domain, double Lambda, double a, std::int64_t walkers, std::uint64_t seed,
           std::vector<double> start, double lo, double hi, int bins, int dim, double outer_radius) {
            const DomainSpec dom = make_canonical(domain_kind_from_string(domain), {dim, outer_radius});
            Vec3 x{0, 0, 0};
            for (std::size_t i = 0; i < std::min<std::size_t>(3, start.size()); ++i) x[i] = start[i];
            MeasureHistogram h;
            {
                py::gil_scoped_release release;
                h = estimate_spread_measure(dom, x, {a, Lambda}, {Binning::Kind::Coordinate, lo, hi, bins},
                                            {walkers, seed, 0, 0.01});
            }
            return histogram_dict(h);
        },
        py::arg("domain"), py::arg("Lambda"), py::arg("a"), py::arg("walkers"), py::arg("seed"), py::arg("start"),
        py::arg("lo"), py::arg("hi"), py::arg("bins"), py::arg("dim") = 0, py::arg("outer_radius") = 3.0);
    m.def(
        "stopping_time_sample",
        [](double L, double a, std::int64_t n, std::uint64_t seed) {
            py::gil_scoped_release release;
            return estimate_stopping_time(L, a, n, seed).times;
        },
        py::arg("Lambda"), py::arg("a"), py::arg("n"), py::arg("seed"), "Sorted uncensored stopping times.");

    // lattice operators
    py::class_<LatticeDomain>(m, "Lattice")
        .def(py::init([](const std::string& fixture, const std::string& json) { return lattice(fixture, json); }),
             py::arg("fixture") = "", py::arg("json") = "")
        .def_property_readonly("mesh", &LatticeDomain::mesh)
        .def_property_readonly("dimension", &LatticeDomain::dimension)
        .def_property_readonly("bulk_count", [](const LatticeDomain& d) { return d.bulk_count(); })
        .def_property_readonly("working_count", [](const LatticeDomain& d) { return d.working_indices().size(); });
    m.def("fixture_names", [] {
        std::vector<std::string> names;
        for (auto& [name, dom] : fixtures::bundled()) names.push_back(name);
        return names;
    });
    m.def("self_transport", [](const LatticeDomain& d) { return build_Q(d).Q; }, py::arg("lattice"));
    m.def("dtn_matrix", [](const LatticeDomain& d) { return build_M(build_Q(d)).matrix(); }, py::arg("lattice"));
    m.def(
        "dtn_spectrum",
        [](const LatticeDomain& d) {
            const auto M = build_M(build_Q(d));
            const auto s = d.source_indices().empty() ? spectrum(M) : spectrum(M, hitting_distribution(d).density);
            return py::make_tuple(s.mu, s.F);
        },
        py::arg("lattice"), "(mu, F); F is empty without a Source.");
    m.def(
        "absorption_distribution",
        [](const LatticeDomain& d, double L) {
            const auto M = build_M(build_Q(d));
            const auto P0 = hitting_distribution(d);
            return absorption_distribution(P0, spreading_operator(M, L), M).P;
        },
        py::arg("lattice"), py::arg("Lambda"));
    m.def("total_flux", [](const LatticeDomain& d, double L, double D) { return lattice_total_flux(d, L, D); },
          py::arg("lattice"), py::arg("Lambda"), py::arg("D") = 1.0);

    // coarse graining
    m.def(
        "lsa_compare",
        [](const std::vector<std::array<double, 2>>& working, const std::vector<std::vector<std::array<double, 2>>>& source,
           const std::vector<std::vector<std::array<double, 2>>>& walls, double L, double a, double D) {
            LsaProblem p;
            p.working = to_polyline(working);
            for (const auto& s : source) p.source.push_back(to_polyline(s));
            for (const auto& w : walls) p.walls.push_back(to_polyline(w));
            return compare_flux(p, L, a, D).to_json().dump();
        },
        py::arg("working"), py::arg("source"), py::arg("walls"), py::arg("Lambda"), py::arg("a"), py::arg("D") = 1.0,
        "Report as a JSON string.");
    m.def(
        "koch_channel",
        [](int gen) {
            const auto c = fixtures::channel(fixtures::quadratic_koch(gen), 1.0);
            auto pts = [](const Polyline& p) {
                std::vector<std::array<double, 2>> v;
                for (const auto& q : p.points) v.push_back({q[0], q[1]});
                return v;
            };
            std::vector<std::vector<std::array<double, 2>>> walls;
            for (const auto& w : c.walls) walls.push_back(pts(w));
            return py::make_tuple(pts(c.working), std::vector<std::vector<std::array<double, 2>>>{pts(c.source)}, walls);
        },
        py::arg("generation"), "(working, [source], walls) of a unit channel over a quadratic Koch floor.");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::dispatch(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs one prbm subcommand in-process; returns (exit_code, stdout, stderr).");
}
