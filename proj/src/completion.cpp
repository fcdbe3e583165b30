#include "shapecomplete/completion.hpp"

#include "shapecomplete/error.hpp"

#include <algorithm>
#include <limits>

namespace shapecomplete {

std::string_view to_string(CompletionMethod method) noexcept
{
    return method == CompletionMethod::smooth ? "smooth" : "cut_and_paste";
}

CompletionMethod parse_method(std::string_view name)
{
    if (name == "cnp" || name == "cut_and_paste" || name == "cut-and-paste")
        return CompletionMethod::cut_and_paste;
    if (name == "smooth")
        return CompletionMethod::smooth;
    throw ConfigError("unknown completion method '" + std::string(name) + "' (expected cnp or smooth)");
}

namespace {

void check_inputs(const TriMesh& prior, const VertexMask& known, const TriMesh& estimate)
{
    require_same_topology(prior, estimate, "completion");
    if (known.size() != prior.vertex_count())
        throw TopologyError("completion: mask size does not match the prior");
    if (known.none())
        throw ConfigError("completion: known region is empty");
    if (known.all())
        throw ConfigError("completion: known region covers the whole mesh; nothing to complete");
}

TriMesh join(const TriMesh& prior, const VertexMask& known, const std::vector<Point3>& donor)
{
    std::vector<Point3> verts(prior.vertex_count());
    for (std::size_t i = 0; i < verts.size(); ++i)
        verts[i] = known[i] ? prior.vertex(i) : donor[i];
    return prior.with_vertices(std::move(verts));
}

} // namespace

CompletionResult cut_and_paste(const TriMesh& prior, const VertexMask& known, const TriMesh& estimate)
{
    check_inputs(prior, known, estimate);
    return CompletionResult{join(prior, known, estimate.vertices()), known, CompletionMethod::cut_and_paste, 0, 0.0,
                            estimate};
}

std::vector<int> select_knots(const TriMesh& points, const VertexMask& known, const VertexMask& seam,
                              std::size_t max_knots)
{
    std::vector<int> known_idx = known.indices();
    if (known_idx.size() <= max_knots)
        return known_idx;

    std::vector<char> chosen(points.vertex_count(), 0);
    std::vector<int> knots;
    for (int i : seam.indices())
    {
        chosen[i] = 1;
        knots.push_back(i);
    }
    if (knots.empty())
    {
        chosen[known_idx.front()] = 1;
        knots.push_back(known_idx.front());
    }

    std::vector<double> dist(points.vertex_count(), std::numeric_limits<double>::infinity());
    auto relax = [&](int from) {
        const Point3& p = points.vertex(from);
        for (int i : known_idx)
            if (!chosen[i])
                dist[i] = std::min(dist[i], (points.vertex(i) - p).squaredNorm());
    };
    for (int s : knots)
        relax(s);

    while (knots.size() < max_knots)
    {
        int best = -1;
        double best_d = -1.0;
        for (int i : known_idx)
            if (!chosen[i] && dist[i] > best_d)
            {
                best_d = dist[i];
                best = i;
            }
        if (best < 0)
            break;
        chosen[best] = 1;
        knots.push_back(best);
        relax(best);
    }
    std::sort(knots.begin(), knots.end());
    return knots;
}

CompletionResult smooth_complete(const TriMesh& prior, const VertexMask& known, const TriMesh& estimate,
                                 const SmoothOptions& options)
{
    check_inputs(prior, known, estimate);
    const VertexMask seam = seam_vertices(prior, known);
    if (seam.none())
        throw TopologyError("smooth completion: known and unknown regions share no edge (empty seam)");

    const std::vector<int> knots = select_knots(estimate, known, seam, options.max_knots);
    std::vector<Point3> sources, targets;
    sources.reserve(knots.size());
    targets.reserve(knots.size());
    for (int i : knots)
    {
        sources.push_back(estimate.vertex(i));
        targets.push_back(prior.vertex(i));
    }
    const TpsWarp warp = fit_tps(sources, targets, options.regularization);
    const std::vector<Point3> warped = eval_tps(warp, estimate.vertices());
    TriMesh donor = estimate.with_vertices(warped);

    return CompletionResult{join(prior, known, warped), known, CompletionMethod::smooth, knots.size(),
                            options.regularization, std::move(donor)};
}

nlohmann::json completion_metadata(const CompletionResult& result)
{
    nlohmann::json j;
    j["method"] = std::string(to_string(result.method));
    j["knot_count"] = result.knot_count;
    j["regularization"] = result.regularization;
    j["vertex_count"] = result.mesh.vertex_count();
    j["known_count"] = result.known.count();
    j["unknown_count"] = result.known.size() - result.known.count();
    return j;
}

} // namespace shapecomplete
