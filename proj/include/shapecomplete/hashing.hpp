#pragma once

#include "shapecomplete/mesh.hpp"

#include <span>
#include <string>
#include <vector>

namespace shapecomplete {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(const std::string& text);
std::string file_sha256(const std::string& path);

/// Digest of vertex coordinates (float64 LE) and faces (int32 LE); labels excluded.
std::string mesh_hash(const TriMesh& mesh);

/// Digest over an ordered list of member hashes, skipping index `excluded` (if >= 0).
std::string combined_hash(const std::vector<std::string>& hashes, int excluded = -1);

} // namespace shapecomplete
