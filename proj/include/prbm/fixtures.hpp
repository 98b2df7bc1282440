#pragma once

#include <string>
#include <utility>
#include <vector>

#include "prbm/geometry.hpp"

// Bundled lattice domains used by the test suites, the acceptance binary and
// `prbm validate`.
namespace prbm::fixtures {

/// Three bulk sites in a row between two Working links, walls elsewhere.
LatticeDomain corridor();

/// n x n bulk box with mesh 1/n: top face Source, the other three Working.
LatticeDomain source_box(int n = 16);

/// n x n box with every face Working.
LatticeDomain closed_box(int n = 8);

/// n^3 cube with mesh 1/n: +z face Source, the other five Working.
LatticeDomain source_cube(int n = 6);

/// Rasterized unit disk, every link Working.
LatticeDomain disk(double a);

/// Rasterized annulus: Working unit circle, Source circle of radius R.
LatticeDomain annulus(double R, double a);

/// Working square of side 1 inside a Source square of side 3, both centred.
LatticeDomain concentric_squares(double a);

/// Every fixture above at a coarse mesh, with a name.
std::vector<std::pair<std::string, LatticeDomain>> bundled();

/// Quadratic Koch curve (8 segments of 1/4 per generation) from (0, 0) to
/// (1, 0); generation 0 is the straight segment.
Polyline quadratic_koch(int generation);

/// Channel of unit width: Working curve `bottom` from (0, y0) to (1, y1),
/// Source line at height `top`, reflecting side walls.
struct Channel {
    Polyline working;
    Polyline source;
    std::vector<Polyline> walls;
};
Channel channel(const Polyline& bottom, double top);

LatticeDomain rasterize(const Channel& c, double a);

}  // namespace prbm::fixtures
