#include "prbm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "prbm/error.hpp"

namespace prbm {

namespace {

constexpr int kCoordOffset = 1 << 20;

std::uint64_t site_key(const Site& s) {
    auto field = [](int v) -> std::uint64_t {
        const long long shifted = static_cast<long long>(v) + kCoordOffset;
        require(shifted >= 0 && shifted < (1LL << 21), ErrorKind::InvalidParam,
                "lattice coordinate out of range: " + std::to_string(v));
        return static_cast<std::uint64_t>(shifted);
    };
    return (field(s[0]) << 42) | (field(s[1]) << 21) | field(s[2]);
}

Site add(const Site& a, const Site& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

int direction_of(const Site& from, const Site& to, int dim) {
    for (int dir = 0; dir < 2 * dim; ++dir)
        if (add(from, direction_offset(dir)) == to) return dir;
    return -1;
}

struct Segment {
    Vec2 p, q;
    int tag;  // 0 working, 1 source, 2 reflecting
};

constexpr int kReflecting = 2;

double dist2(const Vec2& a, const Vec2& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1];
    return dx * dx + dy * dy;
}

double point_segment_distance(const Vec2& x, const Segment& s) {
    const double vx = s.q[0] - s.p[0], vy = s.q[1] - s.p[1];
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((x[0] - s.p[0]) * vx + (x[1] - s.p[1]) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::sqrt(dist2(x, {s.p[0] + t * vx, s.p[1] + t * vy}));
}

// Crossing of an axis line with a segment under the half-open rule used for
// both the interior test and link tagging. axis 0: horizontal line y = c.
struct Crossing {
    double coord;
    int segment;
};

std::vector<Crossing> line_crossings(const std::vector<Segment>& segs, int axis, double c) {
    const int u = axis == 0 ? 1 : 0;  // coordinate held fixed
    const int v = 1 - u;              // coordinate along the line
    std::vector<Crossing> out;
    for (int i = 0; i < static_cast<int>(segs.size()); ++i) {
        const Segment& s = segs[i];
        if ((s.p[u] <= c) == (s.q[u] <= c)) continue;
        const double t = (c - s.p[u]) / (s.q[u] - s.p[u]);
        out.push_back({s.p[v] + t * (s.q[v] - s.p[v]), i});
    }
    std::sort(out.begin(), out.end(), [](const Crossing& a, const Crossing& b) { return a.coord < b.coord; });
    return out;
}

}  // namespace

std::string to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::HalfSpace: return "halfspace";
        case DomainKind::DiskInterior: return "disk";
        case DomainKind::DiskExterior: return "disk-exterior";
        case DomainKind::BallInterior: return "ball";
        case DomainKind::BallExterior: return "ball-exterior";
        case DomainKind::Annulus: return "annulus";
        case DomainKind::Lattice: return "lattice";
    }
    return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
    for (auto k : {DomainKind::HalfSpace, DomainKind::DiskInterior, DomainKind::DiskExterior,
                   DomainKind::BallInterior, DomainKind::BallExterior, DomainKind::Annulus,
                   DomainKind::Lattice})
        if (to_string(k) == name) return k;
    if (name == "halfplane") return DomainKind::HalfSpace;
    fail(ErrorKind::InvalidParam, "unknown domain kind '" + name + "'");
}

DomainSpec make_canonical(DomainKind kind, const CanonicalParams& params) {
    require(params.dimension == 0 || params.dimension >= 2, ErrorKind::InvalidParam,
            "dimension must be >= 2");
    DomainSpec spec;
    spec.kind = kind;
    switch (kind) {
        case DomainKind::HalfSpace:
            spec.dimension = params.dimension == 0 ? 2 : params.dimension;
            break;
        case DomainKind::DiskInterior:
        case DomainKind::DiskExterior:
            require(params.dimension == 0 || params.dimension == 2, ErrorKind::InvalidParam,
                    "disk domains are two-dimensional");
            spec.dimension = 2;
            break;
        case DomainKind::BallInterior:
        case DomainKind::BallExterior:
            require(params.dimension == 0 || params.dimension == 3, ErrorKind::InvalidParam,
                    "ball domains are three-dimensional");
            spec.dimension = 3;
            break;
        case DomainKind::Annulus:
            require(params.dimension == 0 || params.dimension == 2, ErrorKind::InvalidParam,
                    "annulus is two-dimensional");
            require(params.outer_radius > 1.0 && std::isfinite(params.outer_radius),
                    ErrorKind::InvalidParam, "annulus requires R > 1");
            spec.dimension = 2;
            spec.outer_radius = params.outer_radius;
            break;
        case DomainKind::Lattice:
            fail(ErrorKind::InvalidParam, "lattice domains are built with make_lattice_domain");
    }
    return spec;
}

DomainSpec make_lattice_domain(std::shared_ptr<const LatticeDomain> lattice) {
    require(lattice != nullptr, ErrorKind::InvalidParam, "null lattice");
    DomainSpec spec;
    spec.kind = DomainKind::Lattice;
    spec.dimension = lattice->dimension();
    spec.lattice = std::move(lattice);
    return spec;
}

Site direction_offset(int dir) noexcept {
    Site s{0, 0, 0};
    s[dir / 2] = (dir % 2 == 0) ? 1 : -1;
    return s;
}

// ---------------------------------------------------------------- LatticeDomain

LatticeDomain::LatticeDomain(double mesh, int dimension, Vec3 origin, std::vector<Site> bulk,
                             std::vector<BoundarySite> boundary)
    : mesh_(mesh), dim_(dimension), origin_(origin), bulk_(std::move(bulk)), boundary_(std::move(boundary)) {
    require(mesh_ > 0.0 && std::isfinite(mesh_), ErrorKind::InvalidParam, "mesh must be > 0");
    require(dim_ == 2 || dim_ == 3, ErrorKind::InvalidParam, "lattice dimension must be 2 or 3");
    require(!bulk_.empty(), ErrorKind::DegenerateGeometry, "empty bulk");

    index_.reserve(bulk_.size());
    for (int i = 0; i < static_cast<int>(bulk_.size()); ++i) {
        if (dim_ == 2) require(bulk_[i][2] == 0, ErrorKind::InvalidParam, "2D site with nonzero z");
        index_.emplace_back(site_key(bulk_[i]), i);
    }
    std::sort(index_.begin(), index_.end());
    for (std::size_t i = 1; i < index_.size(); ++i)
        require(index_[i].first != index_[i - 1].first, ErrorKind::DegenerateGeometry, "duplicate bulk site");

    const int nd = directions();
    nbr_.assign(bulk_.size() * nd, -1);
    link_.assign(bulk_.size() * nd, -1);
    for (int i = 0; i < static_cast<int>(bulk_.size()); ++i)
        for (int dir = 0; dir < nd; ++dir) nbr_[i * nd + dir] = bulk_index(add(bulk_[i], direction_offset(dir)));

    inward_idx_.resize(boundary_.size());
    link_dir_.resize(boundary_.size());
    for (int b = 0; b < static_cast<int>(boundary_.size()); ++b) {
        BoundarySite& bs = boundary_[b];
        const int in = bulk_index(bs.inward);
        require(in >= 0, ErrorKind::DegenerateGeometry, "boundary element without bulk inward neighbour");
        require(bulk_index(bs.site) < 0, ErrorKind::DegenerateGeometry, "boundary element on a bulk site");
        const int dir = direction_of(bs.inward, bs.site, dim_);
        require(dir >= 0, ErrorKind::DegenerateGeometry, "boundary element is not a lattice neighbour of its inward site");
        require(link_[in * nd + dir] < 0, ErrorKind::DegenerateGeometry, "duplicate boundary link");
        link_[in * nd + dir] = b;
        inward_idx_[b] = in;
        link_dir_[b] = dir;

        const Site off = direction_offset(dir);
        double n2 = 0.0;
        for (double c : bs.normal) n2 += c * c;
        if (n2 == 0.0) {
            bs.normal = {-double(off[0]), -double(off[1]), -double(off[2])};
        } else {
            const double n = std::sqrt(n2);
            for (double& c : bs.normal) c /= n;
        }
        if (bs.tag == BoundaryTag::Working) working_.push_back(b);
        else source_.push_back(b);
    }

    // Connectivity of the bulk under nearest-neighbour moves.
    std::vector<char> seen(bulk_.size(), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const int i = frontier.front();
        frontier.pop();
        for (int dir = 0; dir < nd; ++dir) {
            const int j = nbr_[i * nd + dir];
            if (j >= 0 && !seen[j]) {
                seen[j] = 1;
                ++reached;
                frontier.push(j);
            }
        }
    }
    require(reached == bulk_.size(), ErrorKind::DegenerateGeometry,
            "bulk is not connected (" + std::to_string(reached) + " of " + std::to_string(bulk_.size()) + " sites reachable)");
}

int LatticeDomain::bulk_index(const Site& s) const {
    const std::uint64_t key = site_key(s);
    auto it = std::lower_bound(index_.begin(), index_.end(), std::make_pair(key, std::numeric_limits<int>::min()));
    if (it != index_.end() && it->first == key) return it->second;
    return -1;
}

double LatticeDomain::projected_cosine(int b) const noexcept {
    const double c = std::abs(boundary_[b].normal[link_dir_[b] / 2]);
    // A link running almost parallel to the interface still carries some
    // flux; the floor keeps H invertible.
    return std::max(c, 1e-3);
}

Vec3 LatticeDomain::position(const Site& s) const noexcept {
    Vec3 p{};
    for (int k = 0; k < 3; ++k) p[k] = k < dim_ ? origin_[k] + (s[k] + 0.5) * mesh_ : 0.0;
    return p;
}

Vec3 LatticeDomain::boundary_position(int b) const noexcept {
    const Vec3 p = position(boundary_[b].site);
    const Vec3 q = position(boundary_[b].inward);
    return {(p[0] + q[0]) / 2, (p[1] + q[1]) / 2, (p[2] + q[2]) / 2};
}

// --------------------------------------------------------------------- Polyline

bool Polyline::closed() const noexcept {
    if (points.size() < 3) return false;
    const double scale = std::max(1.0, std::sqrt(dist2(points.front(), {0, 0})));
    return dist2(points.front(), points.back()) <= 1e-24 * scale * scale;
}

double Polyline::length() const noexcept {
    double total = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) total += std::sqrt(dist2(points[i - 1], points[i]));
    return total;
}

Polyline circle_polyline(double radius, int segments) {
    require(radius > 0 && segments >= 3, ErrorKind::InvalidParam, "circle needs radius > 0 and >= 3 segments");
    Polyline c;
    c.points.reserve(segments + 1);
    for (int k = 0; k < segments; ++k) {
        const double th = 2.0 * M_PI * k / segments;
        c.points.push_back({radius * std::cos(th), radius * std::sin(th)});
    }
    c.points.push_back(c.points.front());
    return c;
}

// -------------------------------------------------------------------- rasterize

LatticeDomain rasterize(const std::vector<Polyline>& working, const std::vector<Polyline>& source, double a,
                        const std::vector<Polyline>& reflecting) {
    require(a > 0.0 && std::isfinite(a), ErrorKind::InvalidParam, "mesh a must be > 0");

    std::vector<Segment> segs;
    std::vector<std::pair<Vec2, Vec2>> open_ends;
    double lo[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    double hi[2] = {-lo[0], -lo[1]};
    auto add_lines = [&](const std::vector<Polyline>& lines, int tag) {
        for (const Polyline& pl : lines) {
            require(pl.points.size() >= 2, ErrorKind::DegenerateGeometry, "polyline with fewer than 2 points");
            for (std::size_t i = 0; i < pl.points.size(); ++i) {
                for (int k = 0; k < 2; ++k) {
                    require(std::isfinite(pl.points[i][k]), ErrorKind::InvalidParam, "non-finite polyline vertex");
                    lo[k] = std::min(lo[k], pl.points[i][k]);
                    hi[k] = std::max(hi[k], pl.points[i][k]);
                }
                if (i > 0 && dist2(pl.points[i - 1], pl.points[i]) > 0)
                    segs.push_back({pl.points[i - 1], pl.points[i], tag});
            }
            if (!pl.closed()) open_ends.emplace_back(pl.points.front(), pl.points.back());
        }
    };
    add_lines(working, 0);
    add_lines(source, 1);
    add_lines(reflecting, kReflecting);
    require(!segs.empty(), ErrorKind::DegenerateGeometry, "no polyline segments");

    // Open polylines must chain into closed loops: every endpoint needs a partner.
    const double span = std::max(hi[0] - lo[0], hi[1] - lo[1]);
    const double tol2 = std::pow(1e-9 * std::max(span, 1.0), 2);
    std::vector<Vec2> ends;
    for (const auto& [p, q] : open_ends) {
        ends.push_back(p);
        ends.push_back(q);
    }
    for (std::size_t i = 0; i < ends.size(); ++i) {
        int partners = 0;
        for (std::size_t j = 0; j < ends.size(); ++j)
            if (j != i && j != (i ^ 1) && dist2(ends[i], ends[j]) <= tol2) ++partners;
        require(partners % 2 == 1, ErrorKind::DegenerateGeometry, "polylines do not close into loops");
    }

    const int i0 = static_cast<int>(std::floor(lo[0] / a)) - 1, i1 = static_cast<int>(std::ceil(hi[0] / a)) + 1;
    const int j0 = static_cast<int>(std::floor(lo[1] / a)) - 1, j1 = static_cast<int>(std::ceil(hi[1] / a)) + 1;
    auto cx = [a](int i) { return (i + 0.5) * a; };

    const int nx = i1 - i0 + 1, ny = j1 - j0 + 1;
    std::vector<char> inside(static_cast<std::size_t>(nx) * ny, 0);
    std::vector<std::vector<Crossing>> rows(ny), cols(nx);
    for (int j = j0; j <= j1; ++j) {
        rows[j - j0] = line_crossings(segs, 0, cx(j));
        const auto& xs = rows[j - j0];
        std::size_t k = 0;
        for (int i = i0; i <= i1; ++i) {
            while (k < xs.size() && xs[k].coord <= cx(i)) ++k;
            // even-odd: number of crossings to the left of the site
            inside[(j - j0) * nx + (i - i0)] = static_cast<char>(k % 2);
        }
    }
    for (int i = i0; i <= i1; ++i) cols[i - i0] = line_crossings(segs, 1, cx(i));

    std::vector<Site> bulk;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i)
            if (inside[(j - j0) * nx + (i - i0)]) bulk.push_back({i, j, 0});
    require(!bulk.empty(), ErrorKind::DegenerateGeometry, "enclosed bulk is empty at mesh " + std::to_string(a));

    auto is_inside = [&](int i, int j) {
        if (i < i0 || i > i1 || j < j0 || j > j1) return false;
        return inside[(j - j0) * nx + (i - i0)] != 0;
    };

    std::vector<BoundarySite> boundary;
    for (const Site& s : bulk) {
        for (int dir = 0; dir < 4; ++dir) {
            const Site off = direction_offset(dir);
            const Site t = add(s, off);
            if (is_inside(t[0], t[1])) continue;
            const int axis = dir / 2;
            const auto& line = axis == 0 ? rows[s[1] - j0] : cols[s[0] - i0];
            const double from = cx(s[axis]), to = cx(t[axis]);
            // Crossings strictly between the two site centres, nearest to the bulk first.
            const Crossing* first = nullptr;
            const Crossing* second = nullptr;
            for (const Crossing& c : line) {
                if (!(std::min(from, to) < c.coord && c.coord < std::max(from, to))) continue;
                if (!first || std::abs(c.coord - from) < std::abs(first->coord - from)) {
                    second = first;
                    first = &c;
                } else if (!second || std::abs(c.coord - from) < std::abs(second->coord - from)) {
                    second = &c;
                }
            }
            int seg = -1;
            if (first) {
                seg = first->segment;
                if (second && segs[second->segment].tag != segs[seg].tag &&
                    std::abs(second->coord - first->coord) < 1e-9 * a)
                    fail(ErrorKind::MeshTooCoarse, "working and source curves meet a lattice link at the same point");
            } else {
                // Degenerate vertex touching: fall back to the nearest segment.
                const Vec2 mid{(cx(s[0]) + cx(t[0])) / 2, (cx(s[1]) + cx(t[1])) / 2};
                double best = std::numeric_limits<double>::infinity();
                for (int k = 0; k < static_cast<int>(segs.size()); ++k) {
                    const double d = point_segment_distance(mid, segs[k]);
                    if (d < best) {
                        best = d;
                        seg = k;
                    }
                }
            }
            const Segment& sg = segs[seg];
            if (sg.tag == kReflecting) continue;
            const double dx = sg.q[0] - sg.p[0], dy = sg.q[1] - sg.p[1];
            const double len = std::hypot(dx, dy);
            Vec3 n{-dy / len, dx / len, 0.0};
            if (n[0] * -off[0] + n[1] * -off[1] < 0) n = {-n[0], -n[1], 0.0};
            boundary.push_back({t, s, sg.tag == 0 ? BoundaryTag::Working : BoundaryTag::Source, n});
        }
    }
    return LatticeDomain(a, 2, {0.0, 0.0, 0.0}, std::move(bulk), std::move(boundary));
}

LatticeDomain rasterize(const Polyline& working, const Polyline& source, double a) {
    return rasterize(std::vector<Polyline>{working}, std::vector<Polyline>{source}, a);
}

LatticeDomain make_box(const std::vector<int>& extents, double a, const std::vector<FaceKind>& faces) {
    const int dim = static_cast<int>(extents.size());
    require(dim == 2 || dim == 3, ErrorKind::InvalidParam, "box dimension must be 2 or 3");
    require(static_cast<int>(faces.size()) == 2 * dim, ErrorKind::InvalidParam, "box needs one kind per face");
    for (int e : extents) require(e >= 1, ErrorKind::InvalidParam, "box extents must be >= 1");

    std::vector<Site> bulk;
    const int nz = dim == 3 ? extents[2] : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < extents[1]; ++j)
            for (int i = 0; i < extents[0]; ++i) bulk.push_back({i, j, k});

    std::vector<BoundarySite> boundary;
    for (const Site& s : bulk) {
        for (int dir = 0; dir < 2 * dim; ++dir) {
            const Site t = add(s, direction_offset(dir));
            const int axis = dir / 2;
            if (t[axis] >= 0 && t[axis] < extents[axis]) continue;
            if (faces[dir] == FaceKind::Reflecting) continue;
            const Site off = direction_offset(dir);
            boundary.push_back({t, s, faces[dir] == FaceKind::Working ? BoundaryTag::Working : BoundaryTag::Source,
                                {-double(off[0]), -double(off[1]), -double(off[2])}});
        }
    }
    return LatticeDomain(a, dim, {0.0, 0.0, 0.0}, std::move(bulk), std::move(boundary));
}

std::vector<double> boundary_measure(const LatticeDomain& dom) {
    return std::vector<double>(dom.boundary_count(), std::pow(dom.mesh(), dom.dimension() - 1));
}

std::vector<double> surface_weights(const LatticeDomain& dom) {
    const double base = std::pow(dom.mesh(), dom.dimension() - 1);
    std::vector<double> w(dom.boundary_count());
    for (int b = 0; b < static_cast<int>(w.size()); ++b) w[b] = base * dom.projected_cosine(b);
    return w;
}

std::vector<double> normal_offsets(const LatticeDomain& dom) {
    std::vector<double> h(dom.boundary_count());
    for (int b = 0; b < static_cast<int>(h.size()); ++b) h[b] = dom.mesh() * dom.projected_cosine(b);
    return h;
}

BoundaryPoint boundary_point(const LatticeDomain& dom, int b) {
    require(b >= 0 && b < static_cast<int>(dom.boundary_count()), ErrorKind::InvalidParam, "boundary index out of range");
    BoundaryPoint pt;
    pt.position = dom.boundary_position(b);
    double th = std::atan2(pt.position[1], pt.position[0]);
    if (th < 0) th += 2.0 * M_PI;
    pt.arclength_coord = th;
    pt.inward_normal = dom.boundary_sites()[b].normal;
    return pt;
}

// ------------------------------------------------------------------------- JSON

namespace {

nlohmann::json site_json(const Site& s, int dim) {
    nlohmann::json j = nlohmann::json::array();
    for (int k = 0; k < dim; ++k) j.push_back(s[k]);
    return j;
}

Site site_from_json(const nlohmann::json& j, int dim) {
    require(j.is_array() && static_cast<int>(j.size()) == dim, ErrorKind::Io, "site must have " + std::to_string(dim) + " coordinates");
    Site s{0, 0, 0};
    for (int k = 0; k < dim; ++k) s[k] = j[k].get<int>();
    return s;
}

std::vector<Polyline> polylines_field(const nlohmann::json& j, const char* key) {
    std::vector<Polyline> out;
    if (!j.contains(key)) return out;
    const auto& v = j.at(key);
    // Either a single polyline ([[x,y],...]) or a list of them.
    const bool single = v.is_array() && !v.empty() && v[0].is_array() && !v[0].empty() && v[0][0].is_number();
    if (single || v.is_object()) {
        out.push_back({polyline_from_json(v)});
    } else {
        for (const auto& p : v) out.push_back({polyline_from_json(p)});
    }
    return out;
}

}  // namespace

nlohmann::json to_json(const LatticeDomain& dom) {
    const int dim = dom.dimension();
    nlohmann::json j;
    j["mesh"] = dom.mesh();
    j["dimension"] = dim;
    j["origin"] = {dom.origin()[0], dom.origin()[1], dom.origin()[2]};
    nlohmann::json bulk = nlohmann::json::array();
    for (const Site& s : dom.bulk_sites()) bulk.push_back(site_json(s, dim));
    j["bulk"] = std::move(bulk);
    nlohmann::json bnd = nlohmann::json::array();
    for (const BoundarySite& b : dom.boundary_sites()) {
        nlohmann::json e;
        e["site"] = site_json(b.site, dim);
        e["inward"] = site_json(b.inward, dim);
        e["tag"] = b.tag == BoundaryTag::Working ? "working" : "source";
        nlohmann::json n = nlohmann::json::array();
        for (int k = 0; k < dim; ++k) n.push_back(b.normal[k]);
        e["normal"] = std::move(n);
        bnd.push_back(std::move(e));
    }
    j["boundary"] = std::move(bnd);
    return j;
}

LatticeDomain lattice_from_json(const nlohmann::json& j) {
    try {
        require(j.is_object(), ErrorKind::Io, "lattice JSON must be an object");
        const double a = j.at("mesh").get<double>();
        if (!j.contains("bulk")) {
            // Polyline description, rasterized on load.
            return rasterize(polylines_field(j, "working"), polylines_field(j, "source"), a,
                             polylines_field(j, "reflecting"));
        }
        const int dim = j.value("dimension", 2);
        require(dim == 2 || dim == 3, ErrorKind::Io, "dimension must be 2 or 3");
        Vec3 origin{0, 0, 0};
        if (j.contains("origin"))
            for (int k = 0; k < 3 && k < static_cast<int>(j["origin"].size()); ++k) origin[k] = j["origin"][k].get<double>();
        std::vector<Site> bulk;
        for (const auto& s : j.at("bulk")) bulk.push_back(site_from_json(s, dim));
        std::vector<BoundarySite> boundary;
        for (const auto& e : j.at("boundary")) {
            BoundarySite b;
            b.site = site_from_json(e.at("site"), dim);
            b.inward = site_from_json(e.at("inward"), dim);
            const std::string tag = e.value("tag", "working");
            require(tag == "working" || tag == "source", ErrorKind::Io, "unknown boundary tag '" + tag + "'");
            b.tag = tag == "working" ? BoundaryTag::Working : BoundaryTag::Source;
            if (e.contains("normal"))
                for (int k = 0; k < dim; ++k) b.normal[k] = e["normal"][k].get<double>();
            boundary.push_back(b);
        }
        return LatticeDomain(a, dim, origin, std::move(bulk), std::move(boundary));
    } catch (const nlohmann::json::exception& ex) {
        fail(ErrorKind::Io, std::string("malformed lattice JSON: ") + ex.what());
    }
}

std::vector<Vec2> polyline_from_json(const nlohmann::json& j) {
    const nlohmann::json& pts = j.is_object() ? j.at("points") : j;
    require(pts.is_array(), ErrorKind::Io, "polyline must be an array of [x, y] pairs");
    std::vector<Vec2> out;
    out.reserve(pts.size());
    for (const auto& p : pts) {
        require(p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number(), ErrorKind::Io,
                "polyline vertex must be an [x, y] pair");
        out.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return out;
}

double hausdorff_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    require(!a.empty() && !b.empty(), ErrorKind::InvalidParam, "Hausdorff distance of an empty set");
    auto directed = [](const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
        double worst = 0.0;
        for (const Vec3& p : x) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec3& q : y) {
                const double d = (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) + (p[2] - q[2]) * (p[2] - q[2]);
                best = std::min(best, d);
            }
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    return std::max(directed(a, b), directed(b, a));
}

}  // namespace prbm
