#include "shapecomplete/experiments.hpp"

#include "shapecomplete/error.hpp"
#include "shapecomplete/hashing.hpp"
#include "shapecomplete/ply.hpp"
#include "shapecomplete/shape_model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

namespace shapecomplete {

void PriorConfig::validate() const
{
    if (!(crest_fraction >= 0.0 && crest_fraction <= 1.0))
        throw ConfigError("crest fraction " + std::to_string(crest_fraction) + " outside [0, 1]");
    if (!include_acetabulum && crest_fraction == 0.0)
        throw ConfigError("prior config without acetabulum needs a nonzero crest fraction");
}

std::vector<PriorConfig> default_prior_configs()
{
    return {{0.0, true}, {0.05, true}, {0.10, true}, {0.15, true}};
}

VertexMask prior_mask(const TriMesh& mesh, const PriorConfig& config, const std::string& acetabulum_label)
{
    config.validate();
    if (config.include_acetabulum)
        return build_prior_mask(mesh, mesh.label(acetabulum_label), config.crest_fraction);
    double hi = mesh.vertex(0).z(), lo = hi;
    for (const Point3& p : mesh.vertices())
    {
        hi = std::max(hi, p.z());
        lo = std::min(lo, p.z());
    }
    const double cut = config.crest_fraction >= 1.0 ? lo : hi - config.crest_fraction * (hi - lo);
    return select_slab(mesh, cut, hi);
}

AggregateStats aggregate(std::span<const IterationRow> rows)
{
    AggregateStats a;
    double mean2 = 0.0, maxsum = 0.0, meansum = 0.0, vert2 = 0.0;
    for (const IterationRow& r : rows)
    {
        if (r.failed)
        {
            ++a.failed;
            continue;
        }
        if (r.degenerate)
            ++a.degenerate;
        ++a.iterations;
        mean2 += r.stats.mean_surface * r.stats.mean_surface;
        maxsum += r.stats.max_surface;
        meansum += r.stats.mean_surface;
        vert2 += r.stats.rms_vertex * r.stats.rms_vertex;
    }
    if (a.iterations > 0)
    {
        const auto n = static_cast<double>(a.iterations);
        a.rms_of_mean_surface = std::sqrt(mean2 / n);
        a.mean_of_max_surface = maxsum / n;
        a.mean_of_mean_surface = meansum / n;
        a.rms_of_rms_vertex = std::sqrt(vert2 / n);
    }
    return a;
}

namespace {

bool same_cell(const std::optional<PriorConfig>& a, const std::optional<PriorConfig>& b)
{
    return a.has_value() == b.has_value() && (!a || *a == *b);
}

} // namespace

const ReportCell& ExperimentReport::cell(const std::optional<PriorConfig>& config, const std::string& method) const
{
    for (const ReportCell& c : cells)
        if (c.method == method && same_cell(c.config, config))
            return c;
    throw ConfigError("report has no cell for method '" + method + "'" +
                      (config ? " at crest fraction " + std::to_string(config->crest_fraction) : std::string()));
}

std::vector<IterationRow> ExperimentReport::rows_for(const std::optional<PriorConfig>& config,
                                                     const std::string& method) const
{
    std::vector<IterationRow> out;
    for (const IterationRow& r : rows)
        if (r.method == method && same_cell(r.config, config))
            out.push_back(r);
    return out;
}

TriMesh mean_shape(std::span<const TriMesh> meshes)
{
    if (meshes.empty())
        throw ConfigError("mean_shape: no meshes");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * meshes[0].vertex_count()));
    for (const TriMesh& m : meshes)
    {
        require_same_topology(meshes[0], m, "mean_shape");
        sum += m.coordinates();
    }
    return meshes[0].with_coordinates(sum / static_cast<double>(meshes.size()));
}

namespace {

struct CellResult
{
    IterationRow row;
    std::vector<int> vertices;
    std::vector<double> surface;
};

struct CellSpec
{
    std::optional<PriorConfig> config;
    std::string method;
};

nlohmann::json config_json(const std::optional<PriorConfig>& c)
{
    if (!c)
        return nullptr;
    return {{"crest_fraction", c->crest_fraction}, {"include_acetabulum", c->include_acetabulum}};
}

std::optional<PriorConfig> config_from_json(const nlohmann::json& j)
{
    if (j.is_null())
        return std::nullopt;
    return PriorConfig{j.at("crest_fraction").get<double>(), j.at("include_acetabulum").get<bool>()};
}

void run_parallel(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& task)
{
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
    if (jobs == 1)
    {
        for (std::size_t i = 0; i < count; ++i)
            task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++)
                task(i);
        });
    for (auto& t : workers)
        t.join();
}

ExperimentReport run_loo(std::span<const TriMesh> meshes, const LooOptions& options, bool extrapolate)
{
    if (meshes.size() < 3)
        throw ConfigError("leave-one-out needs at least 3 meshes, got " + std::to_string(meshes.size()));
    for (std::size_t s = 1; s < meshes.size(); ++s)
        require_same_topology(meshes[0], meshes[s], "leave-one-out shape " + std::to_string(s));

    std::vector<CellSpec> specs;
    if (extrapolate)
    {
        if (options.configs.empty())
            throw ConfigError("extrapolation test needs at least one prior config");
        if (options.methods.empty())
            throw ConfigError("extrapolation test needs at least one completion method");
        for (const PriorConfig& c : options.configs)
        {
            c.validate();
            if (c.include_acetabulum)
                for (std::size_t s = 0; s < meshes.size(); ++s)
                    if (!meshes[s].has_label(options.acetabulum_label))
                        throw ConfigError("shape " + std::to_string(s) + " lacks the '" + options.acetabulum_label +
                                          "' label");
            for (CompletionMethod m : options.methods)
                specs.push_back({c, std::string(to_string(m))});
        }
    }
    else
    {
        specs.push_back({std::nullopt, full_projection_method});
    }

    std::vector<std::string> hashes(meshes.size());
    for (std::size_t s = 0; s < meshes.size(); ++s)
        hashes[s] = mesh_hash(meshes[s]);

    std::vector<std::vector<CellResult>> results(meshes.size());
    std::vector<std::exception_ptr> failures(meshes.size());

    auto iteration = [&](std::size_t i) {
        std::vector<CellResult>& out = results[i];
        out.resize(specs.size());
        const std::string training_hash = combined_hash(hashes, static_cast<int>(i));
        for (std::size_t c = 0; c < specs.size(); ++c)
        {
            out[c].row.left_out = static_cast<int>(i);
            out[c].row.config = specs[c].config;
            out[c].row.method = specs[c].method;
            out[c].row.training_hash = training_hash;
        }
        auto record_failure = [&](std::size_t c, const std::exception& e) {
            out[c].row.failed = true;
            out[c].row.error = e.what();
            if (!options.skip_failures && !failures[i])
                failures[i] = std::current_exception();
        };

        std::vector<TriMesh> training;
        training.reserve(meshes.size() - 1);
        for (std::size_t s = 0; s < meshes.size(); ++s)
            if (s != i)
                training.push_back(meshes[s]);
        std::optional<Ssm> ssm;
        try
        {
            ssm.emplace(build_ssm(training));
        }
        catch (const std::exception& e)
        {
            for (std::size_t c = 0; c < specs.size(); ++c)
                record_failure(c, e);
            return;
        }

        const TriMesh& truth = meshes[i];
        const SurfaceIndex truth_index(truth);
        if (!extrapolate)
        {
            try
            {
                const TriMesh estimate = synthesize(*ssm, project_full(*ssm, truth));
                const VertexMask all(truth.vertex_count(), true);
                RegionErrors err = region_errors(estimate, truth, all, &truth_index);
                out[0].row.stats = err.stats;
                out[0].row.known_count = truth.vertex_count();
                out[0].row.evaluated_count = err.vertices.size();
                out[0].vertices = std::move(err.vertices);
                out[0].surface = std::move(err.surface);
            }
            catch (const std::exception& e)
            {
                record_failure(0, e);
            }
            return;
        }

        std::size_t c = 0;
        for (const PriorConfig& config : options.configs)
        {
            const std::size_t first = c;
            c += options.methods.size();
            try
            {
                const VertexMask known = prior_mask(truth, config, options.acetabulum_label);
                const VertexMask unknown = known.complement();
                for (std::size_t m = first; m < c; ++m)
                    out[m].row.known_count = known.count();
                if (unknown.none())
                {
                    for (std::size_t m = first; m < c; ++m)
                        out[m].row.degenerate = true;
                    continue;
                }
                const TriMesh estimate = synthesize(*ssm, project_partial(*ssm, truth, known, options.tikhonov));
                const bool has_seam = !seam_vertices(truth, known).none();
                for (std::size_t m = first; m < c; ++m)
                {
                    try
                    {
                        const CompletionMethod method = options.methods[m - first];
                        const CompletionResult result =
                            method == CompletionMethod::smooth
                                ? smooth_complete(truth, known, estimate,
                                                  SmoothOptions{options.max_knots, options.tps_regularization})
                                : cut_and_paste(truth, known, estimate);
                        if (options.observer)
                            options.observer(CompletionObservation{static_cast<int>(i), config, truth, result});
                        RegionErrors err = region_errors(result.mesh, truth, unknown, &truth_index);
                        IterationRow& row = out[m].row;
                        row.stats = err.stats;
                        row.knot_count = result.knot_count;
                        row.evaluated_count = err.vertices.size();
                        if (has_seam)
                            row.seam_gap = seam_gap(truth, known, result.donor);
                        out[m].vertices = std::move(err.vertices);
                        out[m].surface = std::move(err.surface);
                    }
                    catch (const std::exception& e)
                    {
                        record_failure(m, e);
                    }
                }
            }
            catch (const std::exception& e)
            {
                for (std::size_t m = first; m < c; ++m)
                    record_failure(m, e);
            }
        }
    };

    run_parallel(meshes.size(), options.jobs, iteration);
    for (const auto& f : failures)
        if (f)
            std::rethrow_exception(f);

    ExperimentReport report;
    report.mode = extrapolate ? "extrapolate" : "full";
    const std::size_t n = meshes[0].vertex_count();
    for (std::size_t c = 0; c < specs.size(); ++c)
    {
        std::vector<double> sum(n, 0.0);
        std::vector<std::size_t> count(n, 0);
        std::vector<IterationRow> cell_rows;
        for (std::size_t i = 0; i < meshes.size(); ++i)
        {
            const CellResult& r = results[i][c];
            cell_rows.push_back(r.row);
            for (std::size_t k = 0; k < r.vertices.size(); ++k)
            {
                sum[r.vertices[k]] += r.surface[k];
                ++count[r.vertices[k]];
            }
        }
        ReportCell cell{specs[c].config, specs[c].method, aggregate(cell_rows), std::vector<double>(n)};
        for (std::size_t v = 0; v < n; ++v)
            cell.per_vertex_mean_error[v] = count[v] ? sum[v] / static_cast<double>(count[v]) : known_region_sentinel;
        report.cells.push_back(std::move(cell));
    }
    for (std::size_t i = 0; i < meshes.size(); ++i)
        for (std::size_t c = 0; c < specs.size(); ++c)
            report.rows.push_back(results[i][c].row);

    nlohmann::json prov;
    prov["toolkit_version"] = toolkit_version;
    prov["mode"] = report.mode;
    prov["shape_count"] = meshes.size();
    prov["vertex_count"] = n;
    prov["mesh_hashes"] = hashes;
    prov["dataset_hash"] = combined_hash(hashes);
    prov["surface_distance"] = "one-sided: estimate vertices to the closest point of the true surface";
    prov["aggregation"] = {{"rms", "RMS over iterations of per-mesh mean surface error"},
                           {"max", "average over iterations of per-mesh maximum surface error"}};
    nlohmann::json opts;
    opts["modes_used"] = "all";
    opts["tikhonov"] = options.tikhonov;
    if (extrapolate)
    {
        nlohmann::json configs = nlohmann::json::array();
        for (const PriorConfig& cfg : options.configs)
            configs.push_back(config_json(cfg));
        nlohmann::json methods = nlohmann::json::array();
        for (CompletionMethod m : options.methods)
            methods.push_back(std::string(to_string(m)));
        opts["configs"] = configs;
        opts["methods"] = methods;
        opts["max_knots"] = options.max_knots;
        opts["tps_regularization"] = options.tps_regularization;
        opts["acetabulum_label"] = options.acetabulum_label;
    }
    opts["skip_failures"] = options.skip_failures;
    prov["options"] = opts;
    for (const auto& [key, value] : options.provenance.items())
        prov[key] = value;
    report.provenance = std::move(prov);
    return report;
}

} // namespace

ExperimentReport loo_full(std::span<const TriMesh> meshes, const LooOptions& options)
{
    return run_loo(meshes, options, false);
}

ExperimentReport loo_extrapolate(std::span<const TriMesh> meshes, const LooOptions& options)
{
    return run_loo(meshes, options, true);
}

namespace {

nlohmann::json stats_json(const ErrorStats& s)
{
    return {{"rms_surface", s.rms_surface},
            {"max_surface", s.max_surface},
            {"mean_surface", s.mean_surface},
            {"rms_vertex", s.rms_vertex},
            {"sample_count", s.sample_count}};
}

nlohmann::json aggregate_json(const AggregateStats& a)
{
    return {{"rms_of_mean_surface", a.rms_of_mean_surface},
            {"mean_of_max_surface", a.mean_of_max_surface},
            {"mean_of_mean_surface", a.mean_of_mean_surface},
            {"rms_of_rms_vertex", a.rms_of_rms_vertex},
            {"iterations", a.iterations},
            {"failed", a.failed},
            {"degenerate", a.degenerate}};
}

} // namespace

nlohmann::json to_json(const ExperimentReport& report)
{
    nlohmann::json j;
    j["mode"] = report.mode;
    j["provenance"] = report.provenance;
    nlohmann::json cells = nlohmann::json::array();
    for (const ReportCell& c : report.cells)
        cells.push_back({{"config", config_json(c.config)},
                         {"method", c.method},
                         {"aggregate", aggregate_json(c.aggregate)},
                         {"per_vertex_mean_error", c.per_vertex_mean_error}});
    j["cells"] = cells;
    nlohmann::json rows = nlohmann::json::array();
    for (const IterationRow& r : report.rows)
    {
        nlohmann::json row = {{"left_out", r.left_out},
                              {"config", config_json(r.config)},
                              {"method", r.method},
                              {"stats", stats_json(r.stats)},
                              {"knot_count", r.knot_count},
                              {"known_count", r.known_count},
                              {"evaluated_count", r.evaluated_count},
                              {"degenerate", r.degenerate},
                              {"failed", r.failed},
                              {"error", r.error},
                              {"training_hash", r.training_hash}};
        row["seam_gap"] = r.seam_gap ? nlohmann::json(*r.seam_gap) : nlohmann::json(nullptr);
        rows.push_back(std::move(row));
    }
    j["per_iteration"] = rows;
    return j;
}

ExperimentReport report_from_json(const nlohmann::json& j)
{
    try
    {
        ExperimentReport report;
        report.mode = j.at("mode").get<std::string>();
        report.provenance = j.at("provenance");
        for (const auto& c : j.at("cells"))
        {
            ReportCell cell;
            cell.config = config_from_json(c.at("config"));
            cell.method = c.at("method").get<std::string>();
            const auto& a = c.at("aggregate");
            cell.aggregate.rms_of_mean_surface = a.at("rms_of_mean_surface").get<double>();
            cell.aggregate.mean_of_max_surface = a.at("mean_of_max_surface").get<double>();
            cell.aggregate.mean_of_mean_surface = a.at("mean_of_mean_surface").get<double>();
            cell.aggregate.rms_of_rms_vertex = a.at("rms_of_rms_vertex").get<double>();
            cell.aggregate.iterations = a.at("iterations").get<std::size_t>();
            cell.aggregate.failed = a.at("failed").get<std::size_t>();
            cell.aggregate.degenerate = a.at("degenerate").get<std::size_t>();
            cell.per_vertex_mean_error = c.at("per_vertex_mean_error").get<std::vector<double>>();
            report.cells.push_back(std::move(cell));
        }
        for (const auto& r : j.at("per_iteration"))
        {
            IterationRow row;
            row.left_out = r.at("left_out").get<int>();
            row.config = config_from_json(r.at("config"));
            row.method = r.at("method").get<std::string>();
            const auto& s = r.at("stats");
            row.stats.rms_surface = s.at("rms_surface").get<double>();
            row.stats.max_surface = s.at("max_surface").get<double>();
            row.stats.mean_surface = s.at("mean_surface").get<double>();
            row.stats.rms_vertex = s.at("rms_vertex").get<double>();
            row.stats.sample_count = s.at("sample_count").get<std::size_t>();
            if (!r.at("seam_gap").is_null())
                row.seam_gap = r.at("seam_gap").get<double>();
            row.knot_count = r.at("knot_count").get<std::size_t>();
            row.known_count = r.at("known_count").get<std::size_t>();
            row.evaluated_count = r.at("evaluated_count").get<std::size_t>();
            row.degenerate = r.at("degenerate").get<bool>();
            row.failed = r.at("failed").get<bool>();
            row.error = r.at("error").get<std::string>();
            row.training_hash = r.at("training_hash").get<std::string>();
            report.rows.push_back(std::move(row));
        }
        return report;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw FormatError(std::string("malformed report JSON: ") + e.what());
    }
}

namespace {

std::string number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

std::string report_csv(const ExperimentReport& report)
{
    std::ostringstream out;
    if (report.mode == "full")
    {
        out << "method,rms_of_mean_surface_mm,mean_of_max_surface_mm,mean_of_mean_surface_mm,rms_of_rms_vertex_mm,"
               "iterations,failed\n";
        for (const ReportCell& c : report.cells)
            out << c.method << ',' << number(c.aggregate.rms_of_mean_surface) << ','
                << number(c.aggregate.mean_of_max_surface) << ',' << number(c.aggregate.mean_of_mean_surface) << ','
                << number(c.aggregate.rms_of_rms_vertex) << ',' << c.aggregate.iterations << ','
                << c.aggregate.failed << '\n';
        return out.str();
    }

    std::vector<PriorConfig> configs;
    std::vector<std::string> methods;
    for (const ReportCell& c : report.cells)
    {
        if (c.config && std::find(configs.begin(), configs.end(), *c.config) == configs.end())
            configs.push_back(*c.config);
        if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
            methods.push_back(c.method);
    }
    out << "crest_percent,include_acetabulum";
    for (const std::string& m : methods)
        out << ',' << m << "_rms_mm," << m << "_max_mm";
    out << '\n';
    for (const PriorConfig& cfg : configs)
    {
        out << number(100.0 * cfg.crest_fraction) << ',' << (cfg.include_acetabulum ? "true" : "false");
        for (const std::string& m : methods)
        {
            const AggregateStats& a = report.cell(cfg, m).aggregate;
            out << ',' << number(a.rms_of_mean_surface) << ',' << number(a.mean_of_max_surface);
        }
        out << '\n';
    }
    return out.str();
}

void export_heatmap(const ExperimentReport& report, const std::optional<PriorConfig>& config, const std::string& method,
                    const TriMesh& mean, const std::string& path)
{
    const ReportCell& c = report.cell(config, method);
    if (c.per_vertex_mean_error.size() != mean.vertex_count())
        throw TopologyError("heat map field has " + std::to_string(c.per_vertex_mean_error.size()) +
                            " values for a " + std::to_string(mean.vertex_count()) + "-vertex mean shape");
    save_mesh(mean, path, std::span<const double>(c.per_vertex_mean_error));
}

} // namespace shapecomplete
