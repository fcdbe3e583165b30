#include "cli.hpp"

#include "shapecomplete/completion.hpp"
#include "shapecomplete/error.hpp"
#include "shapecomplete/experiments.hpp"
#include "shapecomplete/hashing.hpp"
#include "shapecomplete/mesh.hpp"
#include "shapecomplete/ply.hpp"
#include "shapecomplete/shape_model.hpp"
#include "shapecomplete/synth.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace shapecomplete::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/**
 * JSON counterpart of CLI11's INI/TOML reader. Top-level keys address
 * options of the main command; an object named after a subcommand holds
 * that subcommand's options, keyed by long flag name without dashes.
 */
class JsonConfig : public CLI::Config
{
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override
    {
        return dump(app, default_also).dump(2) + "\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override
    {
        json j;
        try
        {
            j = json::parse(input);
        }
        catch (const json::exception& e)
        {
            throw CLI::ConversionError("config file is not valid JSON: " + std::string(e.what()));
        }
        if (!j.is_object())
            throw CLI::ConversionError("config file must hold a JSON object");
        std::vector<CLI::ConfigItem> items;
        collect(j, {}, items);
        return items;
    }

private:
    static json dump(const CLI::App* app, bool default_also)
    {
        json j = json::object();
        for (const CLI::Option* opt : app->get_options())
        {
            if (opt->get_lnames().empty() || !opt->get_configurable())
                continue;
            const std::string& name = opt->get_lnames().front();
            if (opt->count() > 0)
            {
                const auto& results = opt->results();
                j[name] = results.size() == 1 ? json(results.front()) : json(results);
            }
            else if (default_also && !opt->get_default_str().empty())
                j[name] = opt->get_default_str();
        }
        for (const CLI::App* sub : app->get_subcommands({}))
        {
            json s = dump(sub, default_also);
            if (!s.empty())
                j[sub->get_name()] = std::move(s);
        }
        return j;
    }

    static void collect(const json& object, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items)
    {
        for (const auto& [key, value] : object.items())
        {
            if (value.is_object())
            {
                std::vector<std::string> nested = parents;
                nested.push_back(key);
                collect(value, nested, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array())
                for (const json& v : value)
                    item.inputs.push_back(scalar(v, key));
            else
                item.inputs.push_back(scalar(value, key));
            items.push_back(std::move(item));
        }
    }

    static std::string scalar(const json& v, const std::string& key)
    {
        if (v.is_string())
            return v.get<std::string>();
        if (v.is_boolean())
            return v.get<bool>() ? "true" : "false";
        if (v.is_number())
            return v.dump();
        throw CLI::ConversionError("config entry '" + key + "' must be a string, number, boolean or array of those");
    }
};

void ensure_directory(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    if (!f)
        throw IoError("write failed: " + path.string());
}

json read_json(const fs::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open " + path.string());
    try
    {
        return json::parse(f);
    }
    catch (const json::exception& e)
    {
        throw FormatError(path.string() + ": " + e.what());
    }
}

PlyEncoding encoding(bool ascii)
{
    return ascii ? PlyEncoding::ascii : PlyEncoding::binary_little_endian;
}

std::string percent_tag(double fraction)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", 100.0 * fraction);
    return buf;
}

std::string heatmap_name(const std::optional<PriorConfig>& config, const std::string& method)
{
    std::string name = "heatmap_" + method;
    if (config)
    {
        name += "_crest" + percent_tag(config->crest_fraction);
        if (!config->include_acetabulum)
            name += "_noacetabulum";
    }
    return name + ".ply";
}

/// Mesh files named on the command line or listed by a dataset manifest.
struct MeshInputs
{
    std::string dataset;
    std::vector<std::string> files;
    std::string axes = "xyz";

    void add_options(CLI::App* cmd)
    {
        cmd->add_option("meshes", files, "Corresponded PLY meshes")->check(CLI::ExistingFile);
        cmd->add_option("--dataset", dataset, "Dataset directory written by synth (reads dataset.json)")
            ->check(CLI::ExistingDirectory);
        cmd->add_option("--axes", axes, "Axis permutation applied at load; regions are cut along the third letter")
            ->capture_default_str();
    }

    std::vector<fs::path> paths() const
    {
        if (!dataset.empty() && !files.empty())
            throw ConfigError("give either --dataset or mesh files, not both");
        std::vector<fs::path> out;
        if (!dataset.empty())
        {
            const json manifest = read_json(fs::path(dataset) / "dataset.json");
            try
            {
                for (const json& s : manifest.at("shapes"))
                    out.push_back(fs::path(dataset) / s.at("file").get<std::string>());
            }
            catch (const json::exception& e)
            {
                throw FormatError("dataset.json: " + std::string(e.what()));
            }
        }
        else
            out.assign(files.begin(), files.end());
        if (out.empty())
            throw ConfigError("no input meshes given");
        return out;
    }

    std::vector<TriMesh> load(json& provenance) const
    {
        std::vector<TriMesh> meshes;
        std::vector<std::string> hashes;
        json inputs = json::array();
        for (const fs::path& p : paths())
        {
            meshes.push_back(permute_axes(load_mesh(p.string()), axes));
            hashes.push_back(mesh_hash(meshes.back()));
            inputs.push_back({{"file", p.filename().string()}, {"sha256", file_sha256(p.string())}});
        }
        provenance["inputs"] = inputs;
        provenance["input_mesh_hashes"] = hashes;
        provenance["input_dataset_hash"] = combined_hash(hashes);
        return meshes;
    }
};

// -- synth --------------------------------------------------------------------

struct SynthArgs
{
    SynthSpec spec;
    std::string out;
    bool ascii = false;
};

void add_synth(CLI::App& app, SynthArgs& a)
{
    CLI::App* cmd = app.add_subcommand("synth", "Generate a seeded population of corresponded hemipelvis proxies");
    cmd->add_option("--out", a.out, "Output dataset directory")->required();
    cmd->add_option("--seed", a.spec.seed, "Random seed")->envname("SHAPECOMPLETE_SEED")->capture_default_str();
    cmd->add_option("--shapes", a.spec.sample_count, "Number of shapes")->capture_default_str();
    cmd->add_option("--modes", a.spec.generative_modes, "Number of generative displacement modes")->capture_default_str();
    cmd->add_option("--sigma", a.spec.coefficient_sigma, "Per-mode coefficient std in mm (default: 3.0 to 0.3 ramp)")
        ->delimiter(',');
    cmd->add_option("--noise", a.spec.noise_sigma, "Per-coordinate jitter std in mm")->capture_default_str();
    cmd->add_option("--resolution", a.spec.template_resolution, "Template subdivision level")->capture_default_str();
    cmd->add_flag("--ascii", a.ascii, "Write ASCII PLY instead of binary");
}

int cmd_synth(const SynthArgs& a, std::ostream& out)
{
    const Population pop = generate_population(a.spec);
    const fs::path dir(a.out);
    ensure_directory(dir);

    json run_config = {{"seed", a.spec.seed},
                       {"shapes", a.spec.sample_count},
                       {"modes", a.spec.generative_modes},
                       {"sigma", a.spec.resolved_sigma()},
                       {"noise", a.spec.noise_sigma},
                       {"resolution", a.spec.template_resolution},
                       {"ascii", a.ascii}};

    save_mesh(pop.template_mesh, (dir / "template.ply").string(), std::nullopt, encoding(a.ascii));
    json shapes = json::array();
    std::vector<std::string> hashes;
    for (std::size_t s = 0; s < pop.meshes.size(); ++s)
    {
        char name[32];
        std::snprintf(name, sizeof name, "shape_%03zu.ply", s);
        const fs::path p = dir / name;
        save_mesh(pop.meshes[s], p.string(), std::nullopt, encoding(a.ascii));
        // Hash what readers will see: coordinates are stored as float32.
        hashes.push_back(mesh_hash(load_mesh(p.string())));
        shapes.push_back({{"file", name}, {"sha256", file_sha256(p.string())}, {"mesh_hash", hashes.back()}});
    }

    json truth = pop.truth.to_json();
    truth["toolkit_version"] = toolkit_version;
    write_text(dir / "ground_truth.json", truth.dump(2) + "\n");

    json manifest;
    manifest["format"] = "shapecomplete-dataset";
    manifest["toolkit_version"] = toolkit_version;
    manifest["command"] = "synth";
    manifest["run_config"] = run_config;
    manifest["template"] = {{"file", "template.ply"}, {"sha256", file_sha256((dir / "template.ply").string())}};
    manifest["ground_truth_sha256"] = file_sha256((dir / "ground_truth.json").string());
    manifest["shapes"] = shapes;
    manifest["dataset_hash"] = combined_hash(hashes);
    write_text(dir / "dataset.json", manifest.dump(2) + "\n");

    out << "wrote " << pop.meshes.size() << " shapes (" << pop.template_mesh.vertex_count() << " vertices) to "
        << dir.string() << "\n";
    out << "dataset_hash " << manifest["dataset_hash"].get<std::string>() << "\n";
    return ok;
}

// -- build-ssm ----------------------------------------------------------------

struct BuildArgs
{
    MeshInputs inputs;
    std::string out;
};

void add_build(CLI::App& app, BuildArgs& a)
{
    CLI::App* cmd = app.add_subcommand("build-ssm", "Build a PCA shape model from corresponded meshes");
    a.inputs.add_options(cmd);
    cmd->add_option("--out", a.out, "Model file; a JSON sidecar is written next to it")->required();
}

int cmd_build(const BuildArgs& a, std::ostream& out)
{
    json provenance = {{"command", "build-ssm"}, {"toolkit_version", toolkit_version}};
    const std::vector<TriMesh> meshes = a.inputs.load(provenance);
    provenance["run_config"] = {{"axes", a.inputs.axes}};
    const Ssm ssm = build_ssm(meshes);
    save_ssm(ssm, a.out, provenance);

    const Eigen::VectorXd& sd = ssm.std_devs();
    const double total = sd.squaredNorm();
    out << "shapes " << ssm.training_count() << "\n";
    out << "modes " << ssm.mode_count() << "\n";
    out << "mode sigma_mm cumulative_variance\n";
    double cumulative = 0.0;
    for (Eigen::Index j = 0; j < sd.size(); ++j)
    {
        cumulative += sd[j] * sd[j];
        out << j + 1 << ' ' << std::setprecision(6) << sd[j] << ' ' << (total > 0.0 ? cumulative / total : 1.0)
            << "\n";
    }
    return ok;
}

// -- complete -----------------------------------------------------------------

struct CompleteArgs
{
    std::string ssm;
    std::string partial;
    std::string mask;
    std::optional<double> crest;
    bool no_acetabulum = false;
    std::string acetabulum_label = "acetabulum";
    std::string method = "smooth";
    std::size_t max_knots = 500;
    double tps_regularization = 0.0;
    double tikhonov = 0.0;
    std::string axes = "xyz";
    std::string out;
    bool ascii = false;
};

void add_complete(CLI::App& app, CompleteArgs& a)
{
    CLI::App* cmd = app.add_subcommand("complete", "Complete a partial observation with a shape model");
    cmd->add_option("--ssm", a.ssm, "Model file from build-ssm")->required()->check(CLI::ExistingFile);
    cmd->add_option("--partial", a.partial, "Full-topology prior PLY, or a PLY of the known vertices only")
        ->required()
        ->check(CLI::ExistingFile);
    auto* mask = cmd->add_option("--mask", a.mask, "Known-vertex mask file")->check(CLI::ExistingFile);
    auto* crest = cmd->add_option("--crest", a.crest, "Known region from the partial's labels: crest fraction (decimal)");
    mask->excludes(crest);
    cmd->add_flag("--no-acetabulum", a.no_acetabulum, "Leave the acetabulum slab out of the --crest region");
    cmd->add_option("--acetabulum-label", a.acetabulum_label, "Label naming the acetabulum")->capture_default_str();
    cmd->add_option("--method", a.method, "cnp (cut-and-paste) or smooth")->capture_default_str();
    cmd->add_option("--max-knots", a.max_knots, "Knot budget for smooth completion")->capture_default_str();
    cmd->add_option("--tps-regularization", a.tps_regularization, "TPS kernel diagonal term in mm")
        ->capture_default_str();
    cmd->add_option("--tikhonov", a.tikhonov, "Weight on sum (b_j / sigma_j)^2 in the partial projection")
        ->capture_default_str();
    cmd->add_option("--axes", a.axes, "Axis permutation applied to the partial at load")->capture_default_str();
    cmd->add_option("--out", a.out, "Completed PLY; metadata goes to <out>.json")->required();
    cmd->add_flag("--ascii", a.ascii, "Write ASCII PLY instead of binary");
}

int cmd_complete(const CompleteArgs& a, std::ostream& out)
{
    const CompletionMethod method = parse_method(a.method);
    const Ssm ssm = load_ssm(a.ssm);
    const TriMesh partial = permute_axes(load_mesh(a.partial), a.axes);
    const std::size_t n = ssm.vertex_count();

    const bool full_topology = partial.vertex_count() == n;
    if (full_topology && partial.faces() != ssm.faces())
        throw TopologyError("partial mesh and model have different connectivity");

    VertexMask known;
    std::optional<PriorConfig> config;
    if (!a.mask.empty())
    {
        known = load_mask(a.mask);
        if (known.size() != n)
            throw TopologyError("mask has " + std::to_string(known.size()) + " entries, model has " + std::to_string(n) +
                                " vertices");
    }
    else if (a.crest)
    {
        if (!full_topology)
            throw TopologyError("--crest needs a partial with the model's " + std::to_string(n) + " vertices");
        config = PriorConfig{*a.crest, !a.no_acetabulum};
        known = prior_mask(partial, *config, a.acetabulum_label);
    }
    else
        throw ConfigError("give --mask or --crest to define the known region");

    if (!full_topology && partial.vertex_count() != known.count())
        throw TopologyError("partial has " + std::to_string(partial.vertex_count()) + " vertices; expected " +
                            std::to_string(n) + " or the " + std::to_string(known.count()) + " known ones");

    const ModeCoefficients b = project_partial(ssm, partial, known, a.tikhonov);
    const TriMesh estimate = synthesize(ssm, b);

    TriMesh prior = partial;
    if (!full_topology)
    {
        std::vector<Point3> verts = estimate.vertices();
        const std::vector<int> idx = known.indices();
        for (std::size_t k = 0; k < idx.size(); ++k)
            verts[idx[k]] = partial.vertex(k);
        prior = estimate.with_vertices(std::move(verts));
    }

    const CompletionResult result = method == CompletionMethod::smooth
                                        ? smooth_complete(prior, known, estimate, {a.max_knots, a.tps_regularization})
                                        : cut_and_paste(prior, known, estimate);
    save_mesh(result.mesh, a.out, std::nullopt, encoding(a.ascii));

    json meta = completion_metadata(result);
    meta["seam_gap_mm"] = seam_gap(prior, known, result.donor);
    meta["coefficients_mm"] = std::vector<double>(b.b.data(), b.b.data() + b.b.size());
    const Eigen::VectorXd bn = b.normalized(ssm);
    meta["coefficients_sd"] = std::vector<double>(bn.data(), bn.data() + bn.size());
    json run_config = {{"method", std::string(to_string(method))},
                       {"max_knots", a.max_knots},
                       {"tps_regularization", a.tps_regularization},
                       {"tikhonov", a.tikhonov},
                       {"axes", a.axes},
                       {"ascii", a.ascii}};
    if (config)
        run_config["prior"] = {{"crest_fraction", config->crest_fraction},
                               {"include_acetabulum", config->include_acetabulum},
                               {"acetabulum_label", a.acetabulum_label}};
    json provenance = {{"command", "complete"},
                       {"toolkit_version", toolkit_version},
                       {"ssm_sha256", file_sha256(a.ssm)},
                       {"partial_sha256", file_sha256(a.partial)},
                       {"run_config", run_config}};
    if (!a.mask.empty())
        provenance["mask_sha256"] = file_sha256(a.mask);
    meta["provenance"] = provenance;
    write_text(a.out + ".json", meta.dump(2) + "\n");

    out << "method " << to_string(method) << "\n";
    out << "known " << known.count() << " of " << n << "\n";
    out << "knots " << result.knot_count << "\n";
    out << "seam_gap_mm " << meta["seam_gap_mm"].get<double>() << "\n";
    return ok;
}

// -- eval-loo -----------------------------------------------------------------

struct EvalArgs
{
    MeshInputs inputs;
    std::string mode = "extrapolate";
    std::vector<double> crest = {0.0, 0.05, 0.10, 0.15};
    bool no_acetabulum = false;
    std::string acetabulum_label = "acetabulum";
    std::vector<std::string> methods = {"cnp", "smooth"};
    std::size_t max_knots = 500;
    double tps_regularization = 0.0;
    double tikhonov = 0.0;
    unsigned jobs = 1;
    bool skip_failures = false;
    std::string out;
    bool ascii = false;
};

void add_eval(CLI::App& app, EvalArgs& a)
{
    CLI::App* cmd = app.add_subcommand("eval-loo", "Leave-one-out evaluation with complete or partial anatomy");
    a.inputs.add_options(cmd);
    cmd->add_option("--mode", a.mode, "full or extrapolate")
        ->check(CLI::IsMember({"full", "extrapolate"}))
        ->capture_default_str();
    cmd->add_option("--crest", a.crest, "Crest fractions as decimals, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_flag("--no-acetabulum", a.no_acetabulum, "Leave the acetabulum slab out of every prior");
    cmd->add_option("--acetabulum-label", a.acetabulum_label, "Label naming the acetabulum")->capture_default_str();
    cmd->add_option("--methods", a.methods, "Completion methods, comma separated (cnp, smooth)")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--max-knots", a.max_knots, "Knot budget for smooth completion")->capture_default_str();
    cmd->add_option("--tps-regularization", a.tps_regularization, "TPS kernel diagonal term in mm")
        ->capture_default_str();
    cmd->add_option("--tikhonov", a.tikhonov, "Weight on sum (b_j / sigma_j)^2 in the partial projection")
        ->capture_default_str();
    cmd->add_option("--jobs", a.jobs, "Worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_flag("--skip-failures", a.skip_failures, "Record failed iterations in the report instead of aborting");
    cmd->add_option("--out", a.out, "Output directory")->required();
    cmd->add_flag("--ascii", a.ascii, "Write ASCII PLY instead of binary");
}

int cmd_eval(const EvalArgs& a, std::ostream& out)
{
    json provenance = {{"command", "eval-loo"}};
    const std::vector<TriMesh> meshes = a.inputs.load(provenance);

    LooOptions options;
    options.configs.clear();
    for (double f : a.crest)
        options.configs.push_back({f, !a.no_acetabulum});
    options.methods.clear();
    json method_names = json::array();
    for (const std::string& m : a.methods)
    {
        options.methods.push_back(parse_method(m));
        method_names.push_back(std::string(to_string(options.methods.back())));
    }
    options.max_knots = a.max_knots;
    options.tps_regularization = a.tps_regularization;
    options.tikhonov = a.tikhonov;
    options.jobs = a.jobs;
    options.skip_failures = a.skip_failures;
    options.acetabulum_label = a.acetabulum_label;

    json run_config = {{"mode", a.mode}, {"axes", a.inputs.axes}, {"tikhonov", a.tikhonov},
                       {"skip_failures", a.skip_failures}, {"ascii", a.ascii}};
    if (a.mode == "extrapolate")
    {
        run_config["crest"] = a.crest;
        run_config["include_acetabulum"] = !a.no_acetabulum;
        run_config["acetabulum_label"] = a.acetabulum_label;
        run_config["methods"] = method_names;
        run_config["max_knots"] = a.max_knots;
        run_config["tps_regularization"] = a.tps_regularization;
    }
    provenance["run_config"] = run_config;
    options.provenance = provenance;

    const ExperimentReport report = a.mode == "full" ? loo_full(meshes, options) : loo_extrapolate(meshes, options);

    const fs::path dir(a.out);
    ensure_directory(dir);
    write_text(dir / "report.json", to_json(report).dump(2) + "\n");
    const std::string csv = report_csv(report);
    write_text(dir / "report.csv", csv);

    const TriMesh mean = mean_shape(meshes);
    save_mesh(mean, (dir / "mean_shape.ply").string(), std::nullopt, encoding(a.ascii));
    for (const ReportCell& c : report.cells)
        save_mesh(mean, (dir / heatmap_name(c.config, c.method)).string(),
                  std::span<const double>(c.per_vertex_mean_error), encoding(a.ascii));

    std::size_t failed = 0;
    for (const IterationRow& r : report.rows)
        failed += r.failed ? 1 : 0;
    out << csv;
    out << "iterations " << report.rows.size() << " failed " << failed << "\n";
    return ok;
}

// -- heatmap ------------------------------------------------------------------

struct HeatmapArgs
{
    std::string report;
    std::string mean;
    std::string method = "smooth";
    std::optional<double> crest;
    bool no_acetabulum = false;
    std::string axes = "xyz";
    std::string out;
    bool ascii = false;
};

void add_heatmap(CLI::App& app, HeatmapArgs& a)
{
    CLI::App* cmd = app.add_subcommand("heatmap", "Export one per-vertex mean error field onto the mean shape");
    cmd->add_option("--report", a.report, "report.json from eval-loo")->required()->check(CLI::ExistingFile);
    cmd->add_option("--mean", a.mean, "Mean shape PLY")->required()->check(CLI::ExistingFile);
    cmd->add_option("--method", a.method, "Method column (cnp, smooth, ssm_projection)")->capture_default_str();
    cmd->add_option("--crest", a.crest, "Crest fraction of the config (omit for the complete-anatomy report)");
    cmd->add_flag("--no-acetabulum", a.no_acetabulum, "Select the config without the acetabulum slab");
    cmd->add_option("--axes", a.axes, "Axis permutation applied to the mean shape at load")->capture_default_str();
    cmd->add_option("--out", a.out, "Output PLY with a per-vertex quality field")->required();
    cmd->add_flag("--ascii", a.ascii, "Write ASCII PLY instead of binary");
}

int cmd_heatmap(const HeatmapArgs& a, std::ostream& out)
{
    const ExperimentReport report = report_from_json(read_json(a.report));
    const TriMesh mean = permute_axes(load_mesh(a.mean), a.axes);
    std::optional<PriorConfig> config;
    if (a.crest)
        config = PriorConfig{*a.crest, !a.no_acetabulum};
    const std::string method =
        a.method == full_projection_method ? a.method : std::string(to_string(parse_method(a.method)));
    const ReportCell& cell = report.cell(config, method);
    if (cell.per_vertex_mean_error.size() != mean.vertex_count())
        throw TopologyError("report field has " + std::to_string(cell.per_vertex_mean_error.size()) + " values, mean shape has " +
                            std::to_string(mean.vertex_count()) + " vertices");
    save_mesh(mean, a.out, std::span<const double>(cell.per_vertex_mean_error), encoding(a.ascii));

    std::size_t evaluated = 0;
    double peak = 0.0;
    for (double v : cell.per_vertex_mean_error)
        if (v != known_region_sentinel)
        {
            ++evaluated;
            peak = std::max(peak, v);
        }
    out << "evaluated_vertices " << evaluated << "\n";
    out << "max_mean_error_mm " << peak << "\n";
    return ok;
}

int exit_code(ErrorCategory c)
{
    switch (c)
    {
    case ErrorCategory::io: return io;
    case ErrorCategory::format: return format;
    case ErrorCategory::topology: return topology;
    case ErrorCategory::singular: return singular;
    case ErrorCategory::config: return config;
    }
    return internal;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app("Statistical shape model completion toolkit", "shapecomplete");
    app.require_subcommand(1);
    app.fallthrough();
    app.allow_config_extras(false);
    app.set_version_flag("--version", std::string(toolkit_version));
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file mirroring the flags, one object per subcommand; flags win");

    SynthArgs synth;
    BuildArgs build;
    CompleteArgs complete;
    EvalArgs eval;
    HeatmapArgs heatmap;
    add_synth(app, synth);
    add_build(app, build);
    add_complete(app, complete);
    add_eval(app, eval);
    add_heatmap(app, heatmap);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        if (e.get_exit_code() == 0)
            return app.exit(e, out, err);
        err << "error: CONFIG: " << e.what() << "\n";
        return config;
    }

    try
    {
        if (app.got_subcommand("synth"))
            return cmd_synth(synth, out);
        if (app.got_subcommand("build-ssm"))
            return cmd_build(build, out);
        if (app.got_subcommand("complete"))
            return cmd_complete(complete, out);
        if (app.got_subcommand("eval-loo"))
            return cmd_eval(eval, out);
        if (app.got_subcommand("heatmap"))
            return cmd_heatmap(heatmap, out);
    }
    catch (const Error& e)
    {
        err << "error: " << to_string(e.category()) << ": " << e.what() << "\n";
        return exit_code(e.category());
    }
    catch (const std::filesystem::filesystem_error& e)
    {
        err << "error: IO: " << e.what() << "\n";
        return io;
    }
    catch (const std::exception& e)
    {
        err << "error: INTERNAL: " << e.what() << "\n";
        return internal;
    }
    err << "error: CONFIG: no subcommand\n";
    return config;
}

} // namespace shapecomplete::cli
