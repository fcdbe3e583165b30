#include "shapecomplete/mesh.hpp"

#include "shapecomplete/error.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace shapecomplete {

VertexMask::VertexMask(std::size_t vertex_count, bool value) : bits_(vertex_count, value ? 1 : 0) {}

VertexMask::VertexMask(std::vector<bool> bits) : bits_(bits.size())
{
    std::transform(bits.begin(), bits.end(), bits_.begin(), [](bool b) { return b ? 1 : 0; });
}

VertexMask VertexMask::from_indices(std::size_t vertex_count, std::span<const int> indices)
{
    VertexMask mask(vertex_count);
    for (int i : indices)
    {
        if (i < 0 || static_cast<std::size_t>(i) >= vertex_count)
            throw TopologyError("mask index " + std::to_string(i) + " out of range for " +
                                std::to_string(vertex_count) + " vertices");
        mask.bits_[i] = 1;
    }
    return mask;
}

std::size_t VertexMask::count() const noexcept
{
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<int> VertexMask::indices() const
{
    std::vector<int> out;
    out.reserve(count());
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i])
            out.push_back(static_cast<int>(i));
    return out;
}

VertexMask VertexMask::complement() const
{
    VertexMask out(*this);
    for (auto& b : out.bits_)
        b = b ? 0 : 1;
    return out;
}

void VertexMask::require_same_size(const VertexMask& other) const
{
    if (size() != other.size())
        throw TopologyError("vertex mask sizes differ (" + std::to_string(size()) + " vs " +
                            std::to_string(other.size()) + ")");
}

VertexMask VertexMask::operator|(const VertexMask& other) const
{
    require_same_size(other);
    VertexMask out(*this);
    for (std::size_t i = 0; i < bits_.size(); ++i)
        out.bits_[i] = bits_[i] | other.bits_[i];
    return out;
}

VertexMask VertexMask::operator&(const VertexMask& other) const
{
    require_same_size(other);
    VertexMask out(*this);
    for (std::size_t i = 0; i < bits_.size(); ++i)
        out.bits_[i] = bits_[i] & other.bits_[i];
    return out;
}

bool VertexMask::is_subset_of(const VertexMask& other) const
{
    require_same_size(other);
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i] && !other.bits_[i])
            return false;
    return true;
}

TriMesh::TriMesh(std::vector<Point3> vertices, std::vector<Face> faces, std::map<std::string, VertexMask> labels)
    : vertices_(std::move(vertices)), faces_(std::move(faces)), labels_(std::move(labels))
{
    if (vertices_.size() < 3)
        throw TopologyError("mesh needs at least 3 vertices, got " + std::to_string(vertices_.size()));
    if (faces_.empty())
        throw TopologyError("mesh needs at least 1 face");
    const auto n = static_cast<long long>(vertices_.size());
    for (std::size_t f = 0; f < faces_.size(); ++f)
    {
        const Face& face = faces_[f];
        for (int v : face)
            if (v < 0 || v >= n)
                throw TopologyError("face " + std::to_string(f) + " references vertex " + std::to_string(v) +
                                    " but the mesh has " + std::to_string(n) + " vertices");
        if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2])
            throw TopologyError("face " + std::to_string(f) + " repeats a vertex index");
    }
    for (const auto& [name, mask] : labels_)
        if (mask.size() != vertices_.size())
            throw TopologyError("label '" + name + "' has " + std::to_string(mask.size()) +
                                " entries for " + std::to_string(vertices_.size()) + " vertices");
}

bool TriMesh::has_label(std::string_view name) const
{
    return labels_.find(std::string(name)) != labels_.end();
}

const VertexMask& TriMesh::label(std::string_view name) const
{
    auto it = labels_.find(std::string(name));
    if (it == labels_.end())
        throw ConfigError("mesh has no label '" + std::string(name) + "'");
    return it->second;
}

TriMesh TriMesh::with_vertices(std::vector<Point3> vertices) const
{
    if (vertices.size() != vertices_.size())
        throw TopologyError("with_vertices: expected " + std::to_string(vertices_.size()) + " vertices, got " +
                            std::to_string(vertices.size()));
    return TriMesh(std::move(vertices), faces_, labels_);
}

TriMesh TriMesh::with_labels(std::map<std::string, VertexMask> labels) const
{
    return TriMesh(vertices_, faces_, std::move(labels));
}

Eigen::VectorXd TriMesh::coordinates() const
{
    Eigen::VectorXd x(3 * vertices_.size());
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        x.segment<3>(3 * i) = vertices_[i];
    return x;
}

TriMesh TriMesh::with_coordinates(const Eigen::VectorXd& stacked) const
{
    if (static_cast<std::size_t>(stacked.size()) != 3 * vertices_.size())
        throw TopologyError("with_coordinates: expected " + std::to_string(3 * vertices_.size()) +
                            " coordinates, got " + std::to_string(stacked.size()));
    std::vector<Point3> verts(vertices_.size());
    for (std::size_t i = 0; i < verts.size(); ++i)
        verts[i] = stacked.segment<3>(3 * i);
    return TriMesh(std::move(verts), faces_, labels_);
}

bool TriMesh::same_topology(const TriMesh& other) const noexcept
{
    return vertices_.size() == other.vertices_.size() && faces_ == other.faces_;
}

void require_same_topology(const TriMesh& a, const TriMesh& b, std::string_view context)
{
    if (a.vertex_count() != b.vertex_count())
        throw TopologyError(std::string(context) + ": vertex counts differ (" + std::to_string(a.vertex_count()) +
                            " vs " + std::to_string(b.vertex_count()) + ")");
    if (a.faces() != b.faces())
        throw TopologyError(std::string(context) + ": connectivity differs");
}

std::vector<std::array<int, 2>> unique_edges(const TriMesh& mesh)
{
    std::vector<std::array<int, 2>> edges;
    edges.reserve(3 * mesh.face_count());
    for (const Face& f : mesh.faces())
        for (int k = 0; k < 3; ++k)
        {
            int a = f[k], b = f[(k + 1) % 3];
            edges.push_back({std::min(a, b), std::max(a, b)});
        }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

TriMesh permute_axes(const TriMesh& mesh, std::string_view order)
{
    if (order.size() != 3)
        throw ConfigError("axis order must have 3 letters, got '" + std::string(order) + "'");
    std::array<int, 3> src{};
    std::array<bool, 3> seen{};
    for (int k = 0; k < 3; ++k)
    {
        const char c = order[k];
        if (c < 'x' || c > 'z' || seen[c - 'x'])
            throw ConfigError("axis order must be a permutation of xyz, got '" + std::string(order) + "'");
        src[k] = c - 'x';
        seen[c - 'x'] = true;
    }
    std::vector<Point3> verts(mesh.vertex_count());
    for (std::size_t i = 0; i < verts.size(); ++i)
    {
        const Point3& p = mesh.vertex(i);
        verts[i] = Point3(p[src[0]], p[src[1]], p[src[2]]);
    }
    return mesh.with_vertices(std::move(verts));
}

namespace {

std::pair<double, double> z_range(const TriMesh& mesh, const VertexMask* subset)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i)
    {
        if (subset && !(*subset)[i])
            continue;
        lo = std::min(lo, mesh.vertex(i).z());
        hi = std::max(hi, mesh.vertex(i).z());
    }
    return {lo, hi};
}

} // namespace

double mesh_height(const TriMesh& mesh)
{
    auto [lo, hi] = z_range(mesh, nullptr);
    return hi - lo;
}

VertexMask select_slab(const TriMesh& mesh, double z_lo, double z_hi)
{
    if (!(z_lo <= z_hi))
        throw ConfigError("select_slab: z_lo must not exceed z_hi");
    VertexMask mask(mesh.vertex_count());
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i)
    {
        const double z = mesh.vertex(i).z();
        if (z_lo <= z && z <= z_hi)
            mask.set(i);
    }
    return mask;
}

VertexMask build_prior_mask(const TriMesh& mesh, const VertexMask& acetabulum_label, double crest_fraction)
{
    if (acetabulum_label.size() != mesh.vertex_count())
        throw TopologyError("acetabulum label size does not match mesh");
    if (acetabulum_label.none())
        throw ConfigError("acetabulum label is empty");
    if (!(crest_fraction >= 0.0 && crest_fraction <= 1.0))
        throw ConfigError("crest fraction must lie in [0, 1]");

    auto [cup_lo, cup_hi] = z_range(mesh, &acetabulum_label);
    VertexMask known = select_slab(mesh, cup_lo, cup_hi);
    if (crest_fraction > 0.0)
    {
        auto [lo, hi] = z_range(mesh, nullptr);
        // Full fraction reaches min z exactly so the whole mesh is covered.
        const double cut = crest_fraction >= 1.0 ? lo : hi - crest_fraction * (hi - lo);
        known = known | select_slab(mesh, cut, hi);
    }
    return known;
}

VertexMask seam_vertices(const TriMesh& mesh, const VertexMask& known)
{
    if (known.size() != mesh.vertex_count())
        throw TopologyError("known mask size does not match mesh");
    VertexMask seam(mesh.vertex_count());
    for (const auto& [a, b] : unique_edges(mesh))
    {
        if (known[a] && !known[b])
            seam.set(a);
        else if (known[b] && !known[a])
            seam.set(b);
    }
    return seam;
}

void save_mask(const VertexMask& mask, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << "vertex_mask " << mask.size() << '\n';
    for (std::size_t i = 0; i < mask.size(); ++i)
        out << (mask[i] ? '1' : '0') << '\n';
    if (!out)
        throw IoError("failed writing '" + path + "'");
}

VertexMask load_mask(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open mask file '" + path + "'");
    std::string tag;
    std::size_t n = 0;
    if (!(in >> tag >> n) || tag != "vertex_mask")
        throw FormatError("'" + path + "' is not a vertex_mask file");
    VertexMask mask(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        int bit = -1;
        if (!(in >> bit) || (bit != 0 && bit != 1))
            throw FormatError("mask file '" + path + "': bad or missing entry " + std::to_string(i));
        if (bit)
            mask.set(i);
    }
    std::string trailing;
    if (in >> trailing)
        throw FormatError("mask file '" + path + "' has trailing data");
    return mask;
}

} // namespace shapecomplete
