#include "prbm/lsa.hpp"

#include <algorithm>
#include <cmath>

#include "prbm/dtn.hpp"
#include "prbm/error.hpp"

namespace prbm {

Polyline coarse_grain(const Polyline& curve, double Lambda) {
    require(Lambda > 0 && std::isfinite(Lambda), ErrorKind::InvalidParam, "Lambda must be > 0");
    require(curve.points.size() >= 2, ErrorKind::DegenerateGeometry, "curve needs at least two points");
    const double perimeter = curve.length();
    require(perimeter > Lambda, ErrorKind::PerimeterTooSmall,
            "curve length " + std::to_string(perimeter) + " does not exceed Lambda");

    const auto& pts = curve.points;
    Polyline out;
    out.points.push_back(pts.front());
    // chord endpoints at arclength k * Lambda; keep a remainder shorter than
    // 1e-12 of the perimeter from producing a degenerate final chord
    const double slack = 1e-12 * perimeter;
    double walked = 0.0, next = Lambda;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double len = std::hypot(pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1]);
        while (next <= walked + len + slack && next < perimeter - slack) {
            const double t = std::clamp((next - walked) / len, 0.0, 1.0);
            out.points.push_back({pts[i - 1][0] + t * (pts[i][0] - pts[i - 1][0]),
                                  pts[i - 1][1] + t * (pts[i][1] - pts[i - 1][1])});
            next += Lambda;
        }
        walked += len;
    }
    out.points.push_back(pts.back());
    return out;
}

nlohmann::json CoarseGrainReport::to_json() const {
    return {{"original_flux", original_flux},
            {"coarse_flux", coarse_flux},
            {"relative_error", relative_error},
            {"n_chords", n_chords},
            {"Lambda", Lambda},
            {"mesh", mesh},
            {"D", D},
            {"original_perimeter", original_perimeter},
            {"coarse_perimeter", coarse_perimeter},
            {"coarse_dirichlet_impedance", coarse_dirichlet_impedance},
            {"chord_anchor", "chords start at the first vertex of the working curve; random chord centres are not modelled"}};
}

CoarseGrainReport compare_flux(const LsaProblem& problem, double Lambda, double a, double D) {
    require(D > 0, ErrorKind::InvalidParam, "D must be > 0");
    require(a > 0 && a <= Lambda / 10 * (1 + 1e-12), ErrorKind::InvalidParam, "compare_flux needs a <= Lambda / 10");
    const Polyline coarse = coarse_grain(problem.working, Lambda);

    CoarseGrainReport r;
    r.Lambda = Lambda;
    r.mesh = a;
    r.D = D;
    r.n_chords = static_cast<int>(coarse.points.size()) - 1;
    r.original_perimeter = problem.working.length();
    r.coarse_perimeter = coarse.length();

    const LatticeDomain original = rasterize({problem.working}, problem.source, a, problem.walls);
    r.original_flux = lattice_total_flux(original, Lambda, D);
    require(r.original_flux > 0, ErrorKind::DegenerateGeometry, "geometry carries no flux; is a Source present?");

    const LatticeDomain chords = rasterize({coarse}, problem.source, a, problem.walls);
    r.coarse_dirichlet_impedance = 1.0 / lattice_total_flux(chords, 0.0, D);
    r.coarse_flux = 1.0 / (r.coarse_dirichlet_impedance + Lambda / (D * r.coarse_perimeter));
    r.relative_error = std::abs(r.coarse_flux - r.original_flux) / r.original_flux;
    return r;
}

}  // namespace prbm
