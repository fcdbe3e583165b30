#pragma once

#include "shapecomplete/completion.hpp"
#include "shapecomplete/mesh.hpp"
#include "shapecomplete/metrics.hpp"

#include "json.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shapecomplete {

inline constexpr const char* toolkit_version = "0.1.0";

/// Known region of a simulated partial scan.
struct PriorConfig
{
    double crest_fraction = 0.0;
    bool include_acetabulum = true;

    void validate() const;
    bool operator==(const PriorConfig&) const = default;
};

/// The grid used by default: acetabulum plus 0, 5, 10 and 15 % of the crest.
std::vector<PriorConfig> default_prior_configs();

/// Acetabulum slab (optional) united with the top crest slab.
VertexMask prior_mask(const TriMesh& mesh, const PriorConfig& config, const std::string& acetabulum_label = "acetabulum");

/// One completed iteration, handed to LooOptions::observer.
struct CompletionObservation
{
    int left_out;
    const PriorConfig& config;
    const TriMesh& prior;
    const CompletionResult& result;
};

struct LooOptions
{
    std::vector<PriorConfig> configs = default_prior_configs();
    std::vector<CompletionMethod> methods = {CompletionMethod::cut_and_paste, CompletionMethod::smooth};
    std::size_t max_knots = 500;
    double tps_regularization = 0.0;
    double tikhonov = 0.0;
    unsigned jobs = 1;
    /// Record failing iterations as gaps instead of aborting.
    bool skip_failures = false;
    std::string acetabulum_label = "acetabulum";
    /// Merged into the report provenance block.
    nlohmann::json provenance = nlohmann::json::object();
    /// Called from worker threads when jobs > 1.
    std::function<void(const CompletionObservation&)> observer;
};

/// Labels used for the "method" column.
inline constexpr const char* full_projection_method = "ssm_projection";

struct IterationRow
{
    int left_out = 0;
    std::optional<PriorConfig> config; ///< empty for the complete-anatomy test
    std::string method;
    ErrorStats stats;
    std::optional<double> seam_gap;
    std::size_t knot_count = 0;
    std::size_t known_count = 0;
    std::size_t evaluated_count = 0;
    bool degenerate = false; ///< evaluation region empty, stats defined as zero
    bool failed = false;
    std::string error;
    std::string training_hash;
};

/**
 * Population summary of one (config, method) cell over its successful rows:
 * RMS of per-mesh mean surface errors, average of per-mesh maxima, plus the
 * mean of means and the RMS of per-mesh RMS vertex errors.
 */
struct AggregateStats
{
    double rms_of_mean_surface = 0.0;
    double mean_of_max_surface = 0.0;
    double mean_of_mean_surface = 0.0;
    double rms_of_rms_vertex = 0.0;
    std::size_t iterations = 0;
    std::size_t failed = 0;
    std::size_t degenerate = 0;
};

AggregateStats aggregate(std::span<const IterationRow> rows);

struct ReportCell
{
    std::optional<PriorConfig> config;
    std::string method;
    AggregateStats aggregate;
    /// Per vertex of the template: mean surface error over iterations that evaluated it, -1 otherwise.
    std::vector<double> per_vertex_mean_error;
};

struct ExperimentReport
{
    std::string mode; ///< "full" or "extrapolate"
    std::vector<ReportCell> cells;
    std::vector<IterationRow> rows; ///< ordered by left-out index, then config, then method
    nlohmann::json provenance;

    const ReportCell& cell(const std::optional<PriorConfig>& config, const std::string& method) const;
    std::vector<IterationRow> rows_for(const std::optional<PriorConfig>& config, const std::string& method) const;
};

/// Heat-map value for vertices never evaluated (known in every iteration).
inline constexpr double known_region_sentinel = -1.0;

/**
 * Complete-anatomy leave-one-out: model from all but one shape, full
 * projection of the held-out shape, errors over all vertices.
 */
ExperimentReport loo_full(std::span<const TriMesh> meshes, const LooOptions& options = {});

/**
 * Partial-prior leave-one-out: per held-out shape, prior masks from its own
 * labels, partial projection with all modes, completion per method, errors
 * over the unknown region only.
 */
ExperimentReport loo_extrapolate(std::span<const TriMesh> meshes, const LooOptions& options = {});

/// Vertex-wise mean of corresponded meshes.
TriMesh mean_shape(std::span<const TriMesh> meshes);

nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

/// Rows = crest fraction (percent), columns = method x {rms, max}.
std::string report_csv(const ExperimentReport& report);

/// Mean shape with `quality` = per-vertex mean error, -1 where the region was always known.
void export_heatmap(const ExperimentReport& report, const std::optional<PriorConfig>& config, const std::string& method,
                    const TriMesh& mean, const std::string& path);

} // namespace shapecomplete
