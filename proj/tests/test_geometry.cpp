#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "prbm/error.hpp"
#include "prbm/geometry.hpp"

using namespace prbm;

namespace {

Polyline square(double x0, double y0, double side) {
    return Polyline{{{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}, {x0, y0}}};
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::Io;
}

double distance_to_square(double x, double y, double lo, double hi) {
    // distance from (x, y) to the perimeter of [lo, hi]^2
    const double cx = std::clamp(x, lo, hi), cy = std::clamp(y, lo, hi);
    if (cx != x || cy != y) return std::hypot(x - cx, y - cy);
    return std::min({x - lo, hi - x, y - lo, hi - y});
}

}  // namespace

TEST_CASE("canonical domains") {
    auto h = make_canonical(DomainKind::HalfSpace, {2, 0});
    CHECK(h.kind == DomainKind::HalfSpace);
    CHECK(h.dimension == 2);
    auto an = make_canonical(DomainKind::Annulus, {0, std::exp(1.0)});
    CHECK(an.kind == DomainKind::Annulus);
    CHECK(an.outer_radius == doctest::Approx(2.718281828459045));
    CHECK(an.dimension == 2);
    CHECK(kind_of([] { make_canonical(DomainKind::Annulus, {0, 0.5}); }) == ErrorKind::InvalidParam);
    CHECK(kind_of([] { make_canonical(DomainKind::Annulus, {0, 1.0}); }) == ErrorKind::InvalidParam);
    CHECK(kind_of([] { make_canonical(DomainKind::HalfSpace, {1, 0}); }) == ErrorKind::InvalidParam);
    CHECK(make_canonical(DomainKind::BallExterior).dimension == 3);
    CHECK(domain_kind_from_string("disk") == DomainKind::DiskInterior);
}

TEST_CASE("boundary measure is a^(d-1)") {
    auto box2 = make_box({4, 4}, 0.1, {FaceKind::Working, FaceKind::Working, FaceKind::Working, FaceKind::Source});
    for (double w : boundary_measure(box2)) CHECK(w == doctest::Approx(0.1).epsilon(1e-15));
    auto box3 = make_box({2, 2, 2}, 0.5, std::vector<FaceKind>(6, FaceKind::Working));
    for (double w : boundary_measure(box3)) CHECK(w == doctest::Approx(0.25).epsilon(1e-15));
    auto box1 = make_box({3, 3}, 1.0, std::vector<FaceKind>(4, FaceKind::Working));
    for (double w : boundary_measure(box1)) CHECK(w == 1.0);
    // axis-aligned walls: projected weights coincide with the nominal ones
    auto sw = surface_weights(box2);
    for (double w : sw) CHECK(w == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("unit square obstacle inside a far source") {
    const double a = 0.1;
    auto dom = rasterize(square(0, 0, 1), square(-5, -5, 11), a);
    // Independent count: bulk sites outside the unit square whose lattice
    // neighbour falls inside it.
    auto in_sq = [](double x, double y) { return x > 0 && x < 1 && y > 0 && y < 1; };
    int expected = 0;
    for (int i = -60; i <= 70; ++i)
        for (int j = -60; j <= 70; ++j) {
            const double x = (i + 0.5) * a, y = (j + 0.5) * a;
            if (in_sq(x, y) || x < -5 || x > 6 || y < -5 || y > 6) continue;
            for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
                if (in_sq(x + di * a, y + dj * a)) ++expected;
        }
    CHECK(expected == 40);
    CHECK(static_cast<int>(dom.working_indices().size()) == expected);
    CHECK(dom.working_indices().size() + dom.source_indices().size() == dom.boundary_count());
}

TEST_CASE("concentric squares are tagged by the nearest curve") {
    auto dom = rasterize(square(-0.5, -0.5, 1.0), square(-1.5, -1.5, 3.0), 0.25);
    REQUIRE(dom.boundary_count() > 0);
    int working = 0;
    for (int b = 0; b < static_cast<int>(dom.boundary_count()); ++b) {
        const Vec3 p = dom.boundary_position(b);
        const double d_in = distance_to_square(p[0], p[1], -0.5, 0.5);
        const double d_out = distance_to_square(p[0], p[1], -1.5, 1.5);
        const auto expected = d_in < d_out ? BoundaryTag::Working : BoundaryTag::Source;
        CHECK(dom.boundary_sites()[b].tag == expected);
        if (expected == BoundaryTag::Working) ++working;
    }
    CHECK(working == 16);  // four per side of the inner square
    CHECK(dom.source_indices().size() == 48);
}

TEST_CASE("structural invariants hold on a rasterized disk") {
    auto dom = rasterize(std::vector<Polyline>{circle_polyline(1.0, 512)}, {}, 1.0 / 16);
    for (int b = 0; b < static_cast<int>(dom.boundary_count()); ++b) {
        const auto& bs = dom.boundary_sites()[b];
        CHECK(dom.bulk_index(bs.inward) >= 0);
        CHECK(dom.bulk_index(bs.inward) == dom.inward_index(b));
        CHECK(dom.bulk_index(bs.site) < 0);
        const double n = std::hypot(bs.normal[0], bs.normal[1], bs.normal[2]);
        CHECK(std::abs(n - 1.0) < 1e-12);
        // normal points from the exterior site back into the bulk
        const Site off = direction_offset(dom.link_direction(b));
        CHECK(bs.normal[0] * off[0] + bs.normal[1] * off[1] < 0);
        const BoundaryPoint bp = boundary_point(dom, b);
        CHECK(bp.arclength_coord >= 0.0);
        CHECK(bp.arclength_coord < 2 * M_PI);
    }
    CHECK(dom.source_indices().empty());
}

TEST_CASE("refinement moves working sites by at most 2a") {
    const double a = 0.1;
    auto coarse = rasterize(square(0, 0, 1), square(-5, -5, 11), a);
    auto fine = rasterize(square(0, 0, 1), square(-5, -5, 11), a / 2);
    auto pts = [](const LatticeDomain& d) {
        std::vector<Vec3> out;
        for (int b : d.working_indices()) out.push_back(d.position(d.boundary_sites()[b].site));
        return out;
    };
    CHECK(hausdorff_distance(pts(coarse), pts(fine)) <= 2 * a);

    auto disk_c = rasterize(std::vector<Polyline>{circle_polyline(1.0, 400)}, {}, 1.0 / 16);
    auto disk_f = rasterize(std::vector<Polyline>{circle_polyline(1.0, 400)}, {}, 1.0 / 32);
    CHECK(hausdorff_distance(pts(disk_c), pts(disk_f)) <= 2.0 / 16);
}

TEST_CASE("rasterize rejects invalid input") {
    CHECK(kind_of([] { rasterize(square(0, 0, 1), square(-5, -5, 11), 0.0); }) == ErrorKind::InvalidParam);
    CHECK(kind_of([] { rasterize(square(0, 0, 1), square(-5, -5, 11), -0.1); }) == ErrorKind::InvalidParam);
    CHECK(kind_of([] { rasterize(std::vector<Polyline>{square(0, 0, 0.05)}, {}, 1.0); }) ==
          ErrorKind::DegenerateGeometry);
    // open curve that never closes
    Polyline open{{{0, 0}, {1, 0}, {1, 1}}};
    CHECK(kind_of([&] { rasterize(std::vector<Polyline>{open}, {}, 0.1); }) == ErrorKind::DegenerateGeometry);
    // two separate islands
    CHECK(kind_of([] { rasterize(std::vector<Polyline>{square(0, 0, 1), square(3, 0, 1)}, {}, 0.1); }) ==
          ErrorKind::DegenerateGeometry);
    // a source curve lying on top of a working edge
    Polyline sliver{{{0, 0}, {0, 1}, {0, 0}}};
    CHECK(kind_of([&] { rasterize(std::vector<Polyline>{square(0, 0, 1)}, std::vector<Polyline>{sliver}, 0.1); }) ==
          ErrorKind::MeshTooCoarse);
}

TEST_CASE("open polylines chain into a loop; reflecting pieces become walls") {
    Polyline bottom{{{0, 0}, {1, 0}}}, right{{{1, 0}, {1, 1}}}, top{{{1, 1}, {0, 1}}}, left{{{0, 1}, {0, 0}}};
    auto dom = rasterize({bottom}, {top}, 0.125, {right, left});
    CHECK(dom.bulk_count() == 64);
    CHECK(dom.working_indices().size() == 8);
    CHECK(dom.source_indices().size() == 8);
    // side walls produce no boundary elements
    for (int b = 0; b < static_cast<int>(dom.boundary_count()); ++b) CHECK(dom.link_direction(b) >= 2);
}

TEST_CASE("box faces follow the direction convention") {
    auto box = make_box({16, 16}, 1.0 / 16,
                        {FaceKind::Working, FaceKind::Working, FaceKind::Source, FaceKind::Working});
    CHECK(box.working_indices().size() == 48);
    CHECK(box.source_indices().size() == 16);
    for (int b : box.source_indices()) CHECK(box.boundary_sites()[b].site[1] == 16);
}

TEST_CASE("JSON round trip preserves the lattice") {
    auto dom = rasterize(square(-0.5, -0.5, 1.0), square(-1.5, -1.5, 3.0), 0.25);
    auto back = lattice_from_json(to_json(dom));
    CHECK(back.mesh() == dom.mesh());
    CHECK(back.bulk_sites() == dom.bulk_sites());
    REQUIRE(back.boundary_count() == dom.boundary_count());
    for (std::size_t b = 0; b < dom.boundary_count(); ++b) {
        CHECK(back.boundary_sites()[b].site == dom.boundary_sites()[b].site);
        CHECK(back.boundary_sites()[b].tag == dom.boundary_sites()[b].tag);
    }
    nlohmann::json poly = {{"mesh", 0.25},
                           {"working", {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}, {-0.5, -0.5}}},
                           {"source", {{-1.5, -1.5}, {1.5, -1.5}, {1.5, 1.5}, {-1.5, 1.5}, {-1.5, -1.5}}}};
    auto from_poly = lattice_from_json(poly);
    CHECK(from_poly.bulk_count() == dom.bulk_count());
    CHECK(kind_of([] { lattice_from_json(nlohmann::json::parse(R"({"mesh": 1, "bulk": [[0]]})")); }) == ErrorKind::Io);
}
