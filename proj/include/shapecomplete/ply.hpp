#pragma once

#include "shapecomplete/mesh.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shapecomplete {

enum class PlyEncoding { ascii, binary_little_endian };

struct PlyContents
{
    TriMesh mesh;
    /// Per-vertex `quality` property, when the file has one.
    std::optional<std::vector<double>> quality;
};

/**
 * Reads a triangle mesh from an ASCII or binary little-endian PLY file.
 *
 * Vertex `x y z` are required. An integer vertex property `label` becomes one
 * VertexMask per distinct nonzero value (value 0 means unlabeled); see
 * label_name(). Unknown elements and properties are skipped. Big-endian
 * files and non-triangular faces are rejected with FormatError.
 */
TriMesh load_mesh(const std::string& path);
PlyContents load_mesh_with_scalars(const std::string& path);

/// Writes x/y/z as float32, labels as int32 `label`, scalars as float32 `quality`.
void save_mesh(const TriMesh& mesh, const std::string& path,
               std::optional<std::span<const double>> scalars = std::nullopt,
               PlyEncoding encoding = PlyEncoding::binary_little_endian);

/// 1 = "acetabulum", 2 = "crest", any other nonzero n = "label_n".
std::string label_name(int code);
/// Inverse of label_name; throws ConfigError for names it cannot encode.
int label_code(const std::string& name);

} // namespace shapecomplete
