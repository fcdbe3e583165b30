#pragma once

#include "shapecomplete/mesh.hpp"
#include "shapecomplete/tps.hpp"

#include "json.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace shapecomplete {

enum class CompletionMethod { cut_and_paste, smooth };

std::string_view to_string(CompletionMethod method) noexcept;
/// Accepts "cnp", "cut_and_paste", "cut-and-paste" and "smooth".
CompletionMethod parse_method(std::string_view name);

struct CompletionResult
{
    TriMesh mesh;
    VertexMask known;
    CompletionMethod method;
    std::size_t knot_count = 0;
    double regularization = 0.0;
    /// Surface that supplied the unknown region: the estimate itself, or its warp.
    TriMesh donor;
};

/// Known vertices from the prior, all others from the estimate.
CompletionResult cut_and_paste(const TriMesh& prior, const VertexMask& known, const TriMesh& estimate);

struct SmoothOptions
{
    std::size_t max_knots = 500;
    double regularization = 0.0;
};

/**
 * Warps the estimate onto the prior with a TPS fitted on the known region
 * (estimate vertex -> prior vertex of the same index) and keeps the prior's
 * known vertices unchanged. Seam vertices are always knots, so the warped
 * estimate meets the prior at the seam.
 */
CompletionResult smooth_complete(const TriMesh& prior, const VertexMask& known, const TriMesh& estimate,
                                 const SmoothOptions& options = {});

/**
 * Knot indices (ascending) for smooth_complete. All known vertices when they
 * fit under max_knots; otherwise every seam vertex plus farthest-point
 * samples of the remaining known vertices, measured on `points`. Ties go to
 * the lowest index.
 */
std::vector<int> select_knots(const TriMesh& points, const VertexMask& known, const VertexMask& seam,
                              std::size_t max_knots);

/// Method, knot count, regularization and region sizes, for a JSON sidecar.
nlohmann::json completion_metadata(const CompletionResult& result);

} // namespace shapecomplete
