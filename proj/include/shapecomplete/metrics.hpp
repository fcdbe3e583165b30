#pragma once

#include "shapecomplete/mesh.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace shapecomplete {

/// Exact distance from p to the closed triangle abc; degenerate triangles fall back to segments.
double point_triangle_distance(const Point3& p, const Point3& a, const Point3& b, const Point3& c);

/**
 * Nearest-surface queries against a fixed triangle mesh.
 *
 * Bounding-volume hierarchy over triangles. A subtree is skipped only when
 * its box lies strictly (with a relative margin) farther than the best
 * triangle found so far, so results match an exhaustive scan exactly.
 */
class SurfaceIndex
{
public:
    explicit SurfaceIndex(const TriMesh& reference);

    double distance(const Point3& p) const;
    std::vector<double> distances(std::span<const Point3> points) const;

private:
    struct Node
    {
        Eigen::Vector3d lo, hi;
        int first = 0; // leaf: first triangle slot; inner: left child
        int count = 0; // leaf: triangle count; inner: 0
        int right = -1;
    };

    int build(int first, int count);

    std::vector<std::array<Point3, 3>> triangles_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
};

/// Per-point distance to the closest point on `reference` (one-sided: points -> reference).
std::vector<double> surface_distance(std::span<const Point3> points, const TriMesh& reference);

struct ErrorStats
{
    double rms_surface = 0.0;
    double max_surface = 0.0;
    double mean_surface = 0.0;
    double rms_vertex = 0.0;
    std::size_t sample_count = 0;
};

struct RegionErrors
{
    ErrorStats stats;
    std::vector<int> vertices;    ///< region vertices, ascending
    std::vector<double> surface;  ///< estimate vertex -> truth surface, per region vertex
    std::vector<double> vertex;   ///< |estimate_i - truth_i|, per region vertex
};

/// Errors of `estimate` against `truth` over `region`. An index built on `truth` may be passed in.
RegionErrors region_errors(const TriMesh& estimate, const TriMesh& truth, const VertexMask& region,
                           const SurfaceIndex* truth_index = nullptr);
ErrorStats region_error_stats(const TriMesh& estimate, const TriMesh& truth, const VertexMask& region);

/// Largest |prior_i - donor_i| over the seam of `known`.
double seam_gap(const TriMesh& prior, const VertexMask& known, const TriMesh& donor);

} // namespace shapecomplete
