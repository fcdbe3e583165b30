#include "shapecomplete/metrics.hpp"

#include "shapecomplete/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace shapecomplete {

namespace {

double point_segment_distance(const Point3& p, const Point3& a, const Point3& b)
{
    const Point3 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0)
        return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

} // namespace

double point_triangle_distance(const Point3& p, const Point3& a, const Point3& b, const Point3& c)
{
    const Point3 ab = b - a;
    const Point3 ac = c - a;
    const double longest2 = std::max({ab.squaredNorm(), ac.squaredNorm(), (c - b).squaredNorm()});
    const double area2 = ab.cross(ac).squaredNorm();
    if (!(area2 > 1e-24 * longest2 * longest2))
        return std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c),
                         point_segment_distance(p, a, c)});

    // Closest point by Voronoi region (Ericson, Real-Time Collision Detection 5.1.5).
    const Point3 ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0)
        return ap.norm();

    const Point3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3)
        return bp.norm();

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0)
        return (p - (a + (d1 / (d1 - d3)) * ab)).norm();

    const Point3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6)
        return cp.norm();

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0)
        return (p - (a + (d2 / (d2 - d6)) * ac)).norm();

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return (p - (b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b))).norm();

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return (p - (a + v * ab + w * ac)).norm();
}

SurfaceIndex::SurfaceIndex(const TriMesh& reference)
{
    triangles_.reserve(reference.face_count());
    for (const Face& f : reference.faces())
        triangles_.push_back({reference.vertex(f[0]), reference.vertex(f[1]), reference.vertex(f[2])});
    order_.resize(triangles_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * triangles_.size());
    build(0, static_cast<int>(triangles_.size()));
}

int SurfaceIndex::build(int first, int count)
{
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d hi = -lo;
    Eigen::Vector3d clo = lo, chi = hi;
    for (int i = first; i < first + count; ++i)
    {
        const auto& t = triangles_[order_[i]];
        for (const Point3& v : t)
        {
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
        const Point3 centroid = (t[0] + t[1] + t[2]) / 3.0;
        clo = clo.cwiseMin(centroid);
        chi = chi.cwiseMax(centroid);
    }
    nodes_[id].lo = lo;
    nodes_[id].hi = hi;

    constexpr int leaf_size = 4;
    if (count <= leaf_size)
    {
        nodes_[id].first = first;
        nodes_[id].count = count;
        return id;
    }
    Eigen::Index axis = 0;
    (chi - clo).maxCoeff(&axis);
    const int mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count, [&](int a, int b) {
        const double ca = triangles_[a][0][axis] + triangles_[a][1][axis] + triangles_[a][2][axis];
        const double cb = triangles_[b][0][axis] + triangles_[b][1][axis] + triangles_[b][2][axis];
        return ca < cb || (ca == cb && a < b);
    });
    const int left = build(first, mid - first);
    const int right = build(mid, first + count - mid);
    nodes_[id].first = left;
    nodes_[id].right = right;
    nodes_[id].count = 0;
    return id;
}

double SurfaceIndex::distance(const Point3& p) const
{
    auto box_dist2 = [&](const Node& n) {
        const Eigen::Vector3d gap = (n.lo - p).cwiseMax(p - n.hi).cwiseMax(0.0);
        return gap.squaredNorm();
    };
    double best = std::numeric_limits<double>::infinity();
    // Prune only boxes clearly beyond the current best so rounding in the box
    // bound can never discard the true minimiser.
    auto beyond = [&](double d2) { return d2 > best * best * (1.0 + 1e-9) + 1e-300; };

    int stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0)
    {
        const Node& n = nodes_[stack[--top]];
        if (beyond(box_dist2(n)))
            continue;
        if (n.count > 0)
        {
            for (int i = n.first; i < n.first + n.count; ++i)
            {
                const auto& t = triangles_[order_[i]];
                best = std::min(best, point_triangle_distance(p, t[0], t[1], t[2]));
            }
            continue;
        }
        const double dl = box_dist2(nodes_[n.first]);
        const double dr = box_dist2(nodes_[n.right]);
        // Nearer child on top of the stack.
        if (dl <= dr)
        {
            stack[top++] = n.right;
            stack[top++] = n.first;
        }
        else
        {
            stack[top++] = n.first;
            stack[top++] = n.right;
        }
    }
    return best;
}

std::vector<double> SurfaceIndex::distances(std::span<const Point3> points) const
{
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        out[i] = distance(points[i]);
    return out;
}

std::vector<double> surface_distance(std::span<const Point3> points, const TriMesh& reference)
{
    return SurfaceIndex(reference).distances(points);
}

RegionErrors region_errors(const TriMesh& estimate, const TriMesh& truth, const VertexMask& region,
                           const SurfaceIndex* truth_index)
{
    require_same_topology(estimate, truth, "region_errors");
    if (region.size() != truth.vertex_count())
        throw TopologyError("region_errors: region mask size does not match the meshes");
    RegionErrors out;
    out.vertices = region.indices();
    if (out.vertices.empty())
        throw ConfigError("region_errors: region is empty");

    std::optional<SurfaceIndex> local;
    if (!truth_index)
        truth_index = &local.emplace(truth);

    out.surface.resize(out.vertices.size());
    out.vertex.resize(out.vertices.size());
    double sum = 0.0, sum2 = 0.0, vsum2 = 0.0, mx = 0.0;
    for (std::size_t k = 0; k < out.vertices.size(); ++k)
    {
        const int i = out.vertices[k];
        const double s = truth_index->distance(estimate.vertex(i));
        const double v = (estimate.vertex(i) - truth.vertex(i)).norm();
        out.surface[k] = s;
        out.vertex[k] = v;
        sum += s;
        sum2 += s * s;
        vsum2 += v * v;
        mx = std::max(mx, s);
    }
    const auto n = static_cast<double>(out.vertices.size());
    out.stats.mean_surface = sum / n;
    out.stats.rms_surface = std::sqrt(sum2 / n);
    out.stats.max_surface = mx;
    out.stats.rms_vertex = std::sqrt(vsum2 / n);
    out.stats.sample_count = out.vertices.size();
    // Rounding can leave the mean a hair above the RMS when all errors are equal.
    out.stats.mean_surface = std::min(out.stats.mean_surface, out.stats.rms_surface);
    return out;
}

ErrorStats region_error_stats(const TriMesh& estimate, const TriMesh& truth, const VertexMask& region)
{
    return region_errors(estimate, truth, region).stats;
}

double seam_gap(const TriMesh& prior, const VertexMask& known, const TriMesh& donor)
{
    require_same_topology(prior, donor, "seam_gap");
    const VertexMask seam = seam_vertices(prior, known);
    if (seam.none())
        throw TopologyError("seam_gap: the known region has no seam");
    double gap = 0.0;
    for (int i : seam.indices())
        gap = std::max(gap, (prior.vertex(i) - donor.vertex(i)).norm());
    return gap;
}

} // namespace shapecomplete
