#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace prbm {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

/// Integer lattice coordinate. Unused trailing components are zero.
using Site = std::array<int, 3>;

enum class DomainKind {
    HalfSpace,
    DiskInterior,
    DiskExterior,
    BallInterior,
    BallExterior,
    Annulus,
    Lattice,
};

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

class LatticeDomain;

struct CanonicalParams {
    int dimension = 0;          ///< 0 selects the natural dimension of the kind
    double outer_radius = 0.0;  ///< annulus source radius R (> 1)
};

/// Canonical or lattice geometry. For the annulus the working interface is
/// the unit circle and the source the circle of radius R.
struct DomainSpec {
    DomainKind kind = DomainKind::HalfSpace;
    int dimension = 2;
    double outer_radius = 0.0;
    std::shared_ptr<const LatticeDomain> lattice;
};

DomainSpec make_canonical(DomainKind kind, const CanonicalParams& params = {});
DomainSpec make_lattice_domain(std::shared_ptr<const LatticeDomain> lattice);

/// Point on a boundary. arclength_coord is the angle for circles and the
/// signed lateral coordinate for the half-plane.
struct BoundaryPoint {
    Vec3 position{};
    double arclength_coord = 0.0;
    Vec3 inward_normal{};
};

enum class BoundaryTag { Working, Source };

/// A boundary element of a lattice domain: the exterior site `site` reached
/// from the bulk site `inward` in one lattice step. An exterior site touching
/// several bulk sites appears once per bulk neighbour.
struct BoundarySite {
    Site site{};
    Site inward{};
    BoundaryTag tag = BoundaryTag::Working;
    Vec3 normal{};  ///< unit normal of the true interface, pointing into the bulk
};

/// Hypercubic lattice domain of mesh a with tagged boundary links.
///
/// Lattice neighbours that are neither bulk sites nor boundary elements act
/// as reflecting walls: a walker attempting the step stays where it is.
class LatticeDomain {
public:
    LatticeDomain(double mesh, int dimension, Vec3 origin, std::vector<Site> bulk,
                  std::vector<BoundarySite> boundary);

    double mesh() const noexcept { return mesh_; }
    int dimension() const noexcept { return dim_; }
    int directions() const noexcept { return 2 * dim_; }
    const Vec3& origin() const noexcept { return origin_; }

    const std::vector<Site>& bulk_sites() const noexcept { return bulk_; }
    const std::vector<BoundarySite>& boundary_sites() const noexcept { return boundary_; }

    std::size_t bulk_count() const noexcept { return bulk_.size(); }
    std::size_t boundary_count() const noexcept { return boundary_.size(); }

    /// Indices into boundary_sites() with the given tag, in list order.
    const std::vector<int>& working_indices() const noexcept { return working_; }
    const std::vector<int>& source_indices() const noexcept { return source_; }

    /// Bulk index of a site, or -1.
    int bulk_index(const Site& s) const;

    /// Bulk index of the neighbour in direction `dir`, or -1.
    int neighbor(int bulk_idx, int dir) const noexcept { return nbr_[bulk_idx * directions() + dir]; }
    /// Boundary element reached from `bulk_idx` in direction `dir`, or -1 (bulk or wall).
    int link(int bulk_idx, int dir) const noexcept { return link_[bulk_idx * directions() + dir]; }
    /// Bulk index of the designated inward neighbour of boundary element `b`.
    int inward_index(int b) const noexcept { return inward_idx_[b]; }

    /// Axis direction e_j of the link, from the bulk site to the exterior site.
    int link_direction(int b) const noexcept { return link_dir_[b]; }

    /// |n . e_j| for boundary element b.
    double projected_cosine(int b) const noexcept;

    Vec3 position(const Site& s) const noexcept;
    /// Midpoint of the link, used as the element's physical location.
    Vec3 boundary_position(int b) const noexcept;

private:
    double mesh_;
    int dim_;
    Vec3 origin_;
    std::vector<Site> bulk_;
    std::vector<BoundarySite> boundary_;
    std::vector<int> working_;
    std::vector<int> source_;
    std::vector<int> nbr_;
    std::vector<int> link_;
    std::vector<int> inward_idx_;
    std::vector<int> link_dir_;
    std::vector<std::pair<std::uint64_t, int>> index_;  // sorted (key, bulk idx)
};

/// Offset of lattice direction `dir` (0:+x 1:-x 2:+y 3:-y 4:+z 5:-z).
Site direction_offset(int dir) noexcept;

struct Polyline {
    std::vector<Vec2> points;
    bool closed() const noexcept;
    double length() const noexcept;
};

/// Rasterizes the region enclosed by the polylines onto a lattice of mesh a.
/// Closed polylines (first point == last point) are loops of their own; open
/// polylines are chained end to end into loops. Interior is decided by the
/// even-odd rule. Each boundary link takes the tag of the first curve it
/// crosses; links crossing a reflecting polyline become walls.
LatticeDomain rasterize(const std::vector<Polyline>& working, const std::vector<Polyline>& source,
                        double a, const std::vector<Polyline>& reflecting = {});

LatticeDomain rasterize(const Polyline& working, const Polyline& source, double a);

enum class FaceKind { Working, Source, Reflecting };

/// Axis-aligned box of `extents` bulk sites. faces[2k] is the +axis face
/// and faces[2k+1] the -axis face of axis k, matching direction_offset.
LatticeDomain make_box(const std::vector<int>& extents, double a, const std::vector<FaceKind>& faces);

/// Nominal surface element a^{d-1} per boundary element.
std::vector<double> boundary_measure(const LatticeDomain& dom);

/// Surface element projected on the true interface: a^{d-1} |n . e_j|.
std::vector<double> surface_weights(const LatticeDomain& dom);

/// Normal distance of each inward neighbour from the interface: a |n . e_j|.
std::vector<double> normal_offsets(const LatticeDomain& dom);

BoundaryPoint boundary_point(const LatticeDomain& dom, int b);

nlohmann::json to_json(const LatticeDomain& dom);
LatticeDomain lattice_from_json(const nlohmann::json& j);

std::vector<Vec2> polyline_from_json(const nlohmann::json& j);

/// Hausdorff distance between two finite point sets.
double hausdorff_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

/// Regular polygon approximating a circle, closed (first point repeated).
Polyline circle_polyline(double radius, int segments);

}  // namespace prbm
