#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "prbm/geometry.hpp"

namespace prbm {

/// Replaces consecutive arclength-Lambda pieces of `curve`, counted from its
/// first vertex, by their end-to-end chords. The last piece may be shorter.
/// Throws PerimeterTooSmall when the curve is not longer than Lambda.
Polyline coarse_grain(const Polyline& curve, double Lambda);

/// Closed-geometry problem for the surveyor comparison: a Working curve, the
/// Source curves and optional reflecting walls that together bound the bulk.
struct LsaProblem {
    Polyline working;
    std::vector<Polyline> source;
    std::vector<Polyline> walls;
};

struct CoarseGrainReport {
    double original_flux = 0.0;  ///< mixed condition on the original curve
    double coarse_flux = 0.0;    ///< Dirichlet coarse curve in series with Lambda / (D L_chords)
    double relative_error = 0.0;
    int n_chords = 0;
    double Lambda = 0.0;
    double mesh = 0.0;
    double D = 1.0;
    double original_perimeter = 0.0;
    double coarse_perimeter = 0.0;
    double coarse_dirichlet_impedance = 0.0;  ///< C0 / Dirichlet flux of the coarse geometry

    nlohmann::json to_json() const;
};

/// Mixed-condition total flux on the original geometry against the Dirichlet
/// flux on the chord-coarsened geometry, both from lattice solves at mesh a.
/// The coarse side carries the interface resistance Lambda / (D L_chords) in
/// series, which makes the comparison exact for a flat interface.
CoarseGrainReport compare_flux(const LsaProblem& problem, double Lambda, double a, double D = 1.0);

}  // namespace prbm
