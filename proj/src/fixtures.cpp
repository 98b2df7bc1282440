#include "prbm/fixtures.hpp"

#include <cmath>

#include "prbm/error.hpp"

namespace prbm::fixtures {

namespace {

// chords about a/4 long keep the polygon well inside one lattice cell of the circle
int circle_segments(double radius, double a) { return std::max(64, static_cast<int>(std::ceil(8 * M_PI * radius / a))); }

Polyline square(double lo, double hi) { return Polyline{{{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}, {lo, lo}}}; }

}  // namespace

LatticeDomain corridor() {
    std::vector<Site> bulk{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    std::vector<BoundarySite> boundary{
        {{-1, 0, 0}, {0, 0, 0}, BoundaryTag::Working, {1, 0, 0}},
        {{3, 0, 0}, {2, 0, 0}, BoundaryTag::Working, {-1, 0, 0}},
    };
    return LatticeDomain(1.0, 2, {0, 0, 0}, std::move(bulk), std::move(boundary));
}

LatticeDomain source_box(int n) {
    using F = FaceKind;
    return make_box({n, n}, 1.0 / n, {F::Working, F::Working, F::Source, F::Working});
}

LatticeDomain closed_box(int n) { return make_box({n, n}, 1.0 / n, std::vector<FaceKind>(4, FaceKind::Working)); }

LatticeDomain source_cube(int n) {
    std::vector<FaceKind> faces(6, FaceKind::Working);
    faces[4] = FaceKind::Source;
    return make_box({n, n, n}, 1.0 / n, faces);
}

LatticeDomain disk(double a) {
    return prbm::rasterize(std::vector<Polyline>{circle_polyline(1.0, circle_segments(1.0, a))}, {}, a);
}

LatticeDomain annulus(double R, double a) {
    require(R > 1, ErrorKind::InvalidParam, "annulus needs R > 1");
    return prbm::rasterize({circle_polyline(1.0, circle_segments(1.0, a))}, {circle_polyline(R, circle_segments(R, a))}, a);
}

LatticeDomain concentric_squares(double a) { return prbm::rasterize({square(1, 2)}, {square(0, 3)}, a); }

std::vector<std::pair<std::string, LatticeDomain>> bundled() {
    std::vector<std::pair<std::string, LatticeDomain>> out;
    out.emplace_back("corridor", corridor());
    out.emplace_back("source_box_16", source_box(16));
    out.emplace_back("closed_box_8", closed_box(8));
    out.emplace_back("source_cube_6", source_cube(6));
    out.emplace_back("disk_a16", disk(1.0 / 16));
    out.emplace_back("annulus_R3_a16", annulus(3.0, 1.0 / 16));
    out.emplace_back("concentric_squares", concentric_squares(0.25));
    out.emplace_back("koch1_channel", rasterize(channel(quadratic_koch(1), 1.0), 1.0 / 32));
    return out;
}

Polyline quadratic_koch(int generation) {
    require(generation >= 0 && generation <= 6, ErrorKind::InvalidParam, "Koch generation must be in [0, 6]");
    std::vector<Vec2> pts{{0, 0}, {1, 0}};
    for (int g = 0; g < generation; ++g) {
        std::vector<Vec2> next{pts.front()};
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const Vec2 p = pts[i - 1];
            const Vec2 d{(pts[i][0] - p[0]) / 4, (pts[i][1] - p[1]) / 4};
            const Vec2 n{-d[1], d[0]};
            // forward, up, forward, down, down, forward, up, forward
            const Vec2 steps[8] = {d, n, d, {-n[0], -n[1]}, {-n[0], -n[1]}, d, n, d};
            Vec2 cur = p;
            for (const Vec2& s : steps) {
                cur = {cur[0] + s[0], cur[1] + s[1]};
                next.push_back(cur);
            }
            next.back() = pts[i];  // keep the shared vertex bit-exact
        }
        pts = std::move(next);
    }
    return Polyline{pts};
}

Channel channel(const Polyline& bottom, double top) {
    require(bottom.points.size() >= 2, ErrorKind::DegenerateGeometry, "channel floor needs two points");
    const Vec2 start = bottom.points.front(), end = bottom.points.back();
    require(start[0] == 0.0 && end[0] == 1.0, ErrorKind::DegenerateGeometry, "channel floor must run from x=0 to x=1");
    for (const Vec2& p : bottom.points)
        require(p[1] < top, ErrorKind::DegenerateGeometry, "channel floor reaches the source line");
    Channel c;
    c.working = bottom;
    c.source = Polyline{{{1.0, top}, {0.0, top}}};
    c.walls = {Polyline{{end, {1.0, top}}}, Polyline{{{0.0, top}, start}}};
    return c;
}

LatticeDomain rasterize(const Channel& c, double a) { return prbm::rasterize({c.working}, {c.source}, a, c.walls); }

}  // namespace prbm::fixtures
