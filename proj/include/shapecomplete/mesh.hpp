#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shapecomplete {

using Point3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/**
 * Boolean membership per mesh vertex.
 *
 * Used for anatomical labels and for the known/unknown split of a partial
 * observation. A mask remembers the vertex count it was built against and
 * all binary operations require matching counts.
 */
class VertexMask
{
public:
    VertexMask() = default;
    explicit VertexMask(std::size_t vertex_count, bool value = false);
    explicit VertexMask(std::vector<bool> bits);

    static VertexMask from_indices(std::size_t vertex_count, std::span<const int> indices);

    std::size_t size() const noexcept { return bits_.size(); }
    bool operator[](std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool value = true) { bits_.at(i) = value ? 1 : 0; }

    std::size_t count() const noexcept;
    bool none() const noexcept { return count() == 0; }
    bool all() const noexcept { return count() == size(); }

    /// Ascending vertex indices with the bit set.
    std::vector<int> indices() const;

    VertexMask complement() const;
    VertexMask operator|(const VertexMask& other) const;
    VertexMask operator&(const VertexMask& other) const;
    bool is_subset_of(const VertexMask& other) const;

    bool operator==(const VertexMask& other) const = default;

private:
    void require_same_size(const VertexMask& other) const;

    std::vector<std::uint8_t> bits_;
};

/**
 * Triangle mesh with optional per-vertex labels.
 *
 * Invariants are checked on construction: at least 3 vertices and 1 face,
 * all face indices in range, and no face repeating a vertex. Instances are
 * immutable values; derived meshes are produced with with_vertices().
 */
class TriMesh
{
public:
    TriMesh(std::vector<Point3> vertices, std::vector<Face> faces,
            std::map<std::string, VertexMask> labels = {});

    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t face_count() const noexcept { return faces_.size(); }

    const std::vector<Point3>& vertices() const noexcept { return vertices_; }
    const Point3& vertex(std::size_t i) const { return vertices_[i]; }
    const std::vector<Face>& faces() const noexcept { return faces_; }
    const std::map<std::string, VertexMask>& labels() const noexcept { return labels_; }

    bool has_label(std::string_view name) const;
    /// Throws ConfigError if the label is absent.
    const VertexMask& label(std::string_view name) const;

    /// Same connectivity and labels, new positions (count must match).
    TriMesh with_vertices(std::vector<Point3> vertices) const;
    TriMesh with_labels(std::map<std::string, VertexMask> labels) const;

    /// Stacked coordinates (x0, y0, z0, x1, ...), length 3N.
    Eigen::VectorXd coordinates() const;
    TriMesh with_coordinates(const Eigen::VectorXd& stacked) const;

    bool same_topology(const TriMesh& other) const noexcept;

    bool operator==(const TriMesh& other) const = default;

private:
    std::vector<Point3> vertices_;
    std::vector<Face> faces_;
    std::map<std::string, VertexMask> labels_;
};

/// Throws TopologyError unless both meshes share vertex count and faces.
void require_same_topology(const TriMesh& a, const TriMesh& b, std::string_view context);

/// Unique undirected edges (lo, hi) with lo < hi, sorted.
std::vector<std::array<int, 2>> unique_edges(const TriMesh& mesh);

/**
 * Reorders coordinate axes, e.g. "xzy" maps (x, y, z) to (x, z, y).
 * Regions are always selected along the third output axis.
 */
TriMesh permute_axes(const TriMesh& mesh, std::string_view order);

/// max z - min z.
double mesh_height(const TriMesh& mesh);

/// Vertices with z_lo <= z <= z_hi.
VertexMask select_slab(const TriMesh& mesh, double z_lo, double z_hi);

/**
 * Known region of a partial observation: every vertex inside the z-range of
 * the acetabulum label, plus the top crest_fraction of the mesh height.
 */
VertexMask build_prior_mask(const TriMesh& mesh, const VertexMask& acetabulum_label, double crest_fraction);

/// Known vertices that share an edge with at least one unknown vertex.
VertexMask seam_vertices(const TriMesh& mesh, const VertexMask& known);

/// Plain-text mask file: a "vertex_mask N" header line followed by N lines of 0 or 1.
void save_mask(const VertexMask& mask, const std::string& path);
VertexMask load_mask(const std::string& path);

} // namespace shapecomplete
