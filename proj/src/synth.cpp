#include "shapecomplete/synth.hpp"

#include "shapecomplete/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace shapecomplete {

namespace {

struct Icosphere
{
    std::vector<Point3> dirs;
    std::vector<Face> faces;
};

Icosphere icosphere(int level)
{
    const double t = std::numbers::phi;
    Icosphere s;
    s.dirs = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
              {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& d : s.dirs)
        d.normalize();
    s.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
               {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
               {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

    for (int l = 0; l < level; ++l)
    {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end())
                return it->second;
            const int id = static_cast<int>(s.dirs.size());
            s.dirs.push_back((s.dirs[a] + s.dirs[b]).normalized());
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<Face> next;
        next.reserve(4 * s.faces.size());
        for (const Face& f : s.faces)
        {
            const int ab = mid(f[0], f[1]);
            const int bc = mid(f[1], f[2]);
            const int ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        s.faces = std::move(next);
    }
    return s;
}

// Cup centre on the +y side, below mid-height; angular radius in radians.
const Point3 cup_direction(0.0, std::cos(-0.6), std::sin(-0.6));
constexpr double cup_radius = 0.35;
constexpr double cup_depth = 14.0;

Point3 hemipelvis(const Point3& u)
{
    const double s = 0.5 * (1.0 + u.z());
    const double blend = s * s * (3.0 - 2.0 * s);
    const double half_width = 45.0 + 35.0 * blend;
    const double half_thickness = 22.0 - 12.0 * blend;
    Point3 p(half_width * u.x(), half_thickness * u.y() + 6.0 * blend * u.x() * u.x(), 100.0 * u.z());
    const double angle = std::acos(std::clamp(u.dot(cup_direction), -1.0, 1.0));
    if (angle < cup_radius)
    {
        const double r = angle / cup_radius;
        p.y() -= cup_depth * (1.0 - r * r) * (1.0 - r * r);
    }
    return p;
}

std::vector<BasisTerm> basis_candidates()
{
    std::vector<BasisTerm> terms = {{2, 1, 2}, {2, 1, 0}, {2, 2, 0}, {2, 2, 1}, {0, 1, 0},
                                    {2, 1, 1}, {0, 2, 2}, {2, 3, 0}, {1, 1, 1}, {2, 3, 1}};
    for (int f = 1; f <= 4; ++f)
        for (int axis = 0; axis < 3; ++axis)
            for (int dir = 0; dir < 3; ++dir)
            {
                const bool present = std::any_of(terms.begin(), terms.end(), [&](const BasisTerm& t) {
                    return t.axis == axis && t.frequency == f && t.direction == dir;
                });
                if (!present)
                    terms.push_back({axis, f, dir});
            }
    return terms;
}

bool flips_triangle(const TriMesh& reference, const std::vector<Point3>& verts)
{
    for (const Face& f : reference.faces())
    {
        const Point3 n0 = (reference.vertex(f[1]) - reference.vertex(f[0])).cross(reference.vertex(f[2]) - reference.vertex(f[0]));
        const Point3 n1 = (verts[f[1]] - verts[f[0]]).cross(verts[f[2]] - verts[f[0]]);
        if (n0.dot(n1) <= 0.0)
            return true;
    }
    return false;
}

} // namespace

TriMesh make_template(int resolution)
{
    if (resolution < 0 || resolution > 7)
        throw ConfigError("template resolution must lie in [0, 7]");
    const Icosphere sphere = icosphere(resolution);
    const std::size_t n = sphere.dirs.size();

    std::vector<Point3> verts(n);
    for (std::size_t i = 0; i < n; ++i)
        verts[i] = hemipelvis(sphere.dirs[i]);

    VertexMask cup(n), crest(n);
    std::size_t nearest_cup = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (sphere.dirs[i].dot(cup_direction) > sphere.dirs[nearest_cup].dot(cup_direction))
            nearest_cup = i;
        if (std::acos(std::clamp(sphere.dirs[i].dot(cup_direction), -1.0, 1.0)) <= cup_radius)
            cup.set(i);
    }
    cup.set(nearest_cup);

    double zlo = verts[0].z(), zhi = verts[0].z();
    std::size_t top = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        zlo = std::min(zlo, verts[i].z());
        if (verts[i].z() > zhi)
        {
            zhi = verts[i].z();
            top = i;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!cup[i] && verts[i].z() >= zhi - 0.1 * (zhi - zlo))
            crest.set(i);
    if (!cup[top])
        crest.set(top);

    return TriMesh(std::move(verts), sphere.faces, {{"acetabulum", cup}, {"crest", crest}});
}

void SynthSpec::validate() const
{
    if (generative_modes < 1)
        throw ConfigError("synth: need at least one generative mode");
    if (sample_count < generative_modes + 2)
        throw ConfigError("synth: sample count must be at least generative modes + 2");
    if (!coefficient_sigma.empty() && coefficient_sigma.size() != static_cast<std::size_t>(generative_modes))
        throw ConfigError("synth: need one coefficient sigma per generative mode");
    if (std::any_of(coefficient_sigma.begin(), coefficient_sigma.end(), [](double s) { return !(s >= 0.0); }))
        throw ConfigError("synth: coefficient sigmas must be >= 0");
    if (!(noise_sigma >= 0.0))
        throw ConfigError("synth: noise sigma must be >= 0");
}

std::vector<double> SynthSpec::resolved_sigma() const
{
    if (!coefficient_sigma.empty())
        return coefficient_sigma;
    std::vector<double> out(static_cast<std::size_t>(generative_modes));
    for (int j = 0; j < generative_modes; ++j)
    {
        const double t = generative_modes > 1 ? static_cast<double>(j) / (generative_modes - 1) : 0.0;
        out[j] = 3.0 * std::pow(0.1, t);
    }
    return out;
}

Eigen::MatrixXd generative_fields(const TriMesh& template_mesh, int mode_count, std::vector<BasisTerm>* basis)
{
    const auto n = static_cast<Eigen::Index>(template_mesh.vertex_count());
    Point3 lo = template_mesh.vertex(0), hi = lo;
    for (const Point3& p : template_mesh.vertices())
    {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Point3 centre = 0.5 * (lo + hi);
    const Point3 half = 0.5 * (hi - lo);

    auto inner = [n](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b) / static_cast<double>(n); };

    Eigen::MatrixXd fields(3 * n, mode_count);
    std::vector<BasisTerm> used;
    int m = 0;
    for (const BasisTerm& term : basis_candidates())
    {
        if (m == mode_count)
            break;
        Eigen::VectorXd f = Eigen::VectorXd::Zero(3 * n);
        for (Eigen::Index v = 0; v < n; ++v)
        {
            const double q = half[term.axis] > 0.0 ? (template_mesh.vertex(v)[term.axis] - centre[term.axis]) / half[term.axis] : 0.0;
            f[3 * v + term.direction] = std::cos(std::numbers::pi * term.frequency * (q + 1.0) / 2.0);
        }
        const double original = std::sqrt(inner(f, f));
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j < m; ++j)
                f -= inner(fields.col(j), f) * fields.col(j);
        const double norm = std::sqrt(inner(f, f));
        if (!(norm > 1e-6 * original))
            continue;
        fields.col(m++) = f / norm;
        used.push_back(term);
    }
    if (m < mode_count)
        throw ConfigError("synth: only " + std::to_string(m) + " independent displacement fields available");
    if (basis)
        *basis = std::move(used);
    return fields;
}

Population generate_population(const SynthSpec& spec)
{
    spec.validate();
    TriMesh templ = make_template(spec.template_resolution);
    const auto n = static_cast<Eigen::Index>(templ.vertex_count());
    const int g = spec.generative_modes;

    GroundTruth truth;
    truth.mode_fields = generative_fields(templ, g, &truth.basis);
    truth.coefficient_sigma = spec.resolved_sigma();
    truth.coefficients = Eigen::MatrixXd::Zero(spec.sample_count, g);
    truth.seed = spec.seed;
    truth.noise_sigma = spec.noise_sigma;

    const Eigen::VectorXd base = templ.coordinates();
    std::vector<TriMesh> meshes;
    meshes.reserve(static_cast<std::size_t>(spec.sample_count));
    constexpr int max_attempts = 32;
    for (int s = 0; s < spec.sample_count; ++s)
    {
        bool accepted = false;
        for (int attempt = 0; attempt < max_attempts && !accepted; ++attempt)
        {
            std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                              static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(attempt)};
            std::mt19937_64 rng(seq);
            std::normal_distribution<double> normal(0.0, 1.0);

            Eigen::VectorXd coeffs(g);
            for (int j = 0; j < g; ++j)
                coeffs[j] = truth.coefficient_sigma[j] * normal(rng);
            Eigen::VectorXd x = base + truth.mode_fields * coeffs;
            for (Eigen::Index i = 0; i < 3 * n; ++i)
                x[i] += spec.noise_sigma * normal(rng);

            std::vector<Point3> verts(static_cast<std::size_t>(n));
            for (Eigen::Index v = 0; v < n; ++v)
                verts[v] = x.segment<3>(3 * v);
            if (flips_triangle(templ, verts))
                continue;
            truth.coefficients.row(s) = coeffs.transpose();
            truth.attempts.push_back(attempt + 1);
            meshes.push_back(templ.with_vertices(std::move(verts)));
            accepted = true;
        }
        if (!accepted)
            throw ConfigError("synth: shape " + std::to_string(s) + " flipped triangles in every redraw; lower the sigmas");
    }
    return Population{std::move(templ), std::move(meshes), std::move(truth)};
}

nlohmann::json GroundTruth::to_json() const
{
    nlohmann::json j;
    j["seed"] = seed;
    j["noise_sigma"] = noise_sigma;
    j["coefficient_sigma"] = coefficient_sigma;
    nlohmann::json terms = nlohmann::json::array();
    for (const BasisTerm& t : basis)
        terms.push_back({{"axis", t.axis}, {"frequency", t.frequency}, {"direction", t.direction}});
    j["basis"] = {{"kind", "cos(pi * frequency * (q_axis + 1) / 2) along direction, q in [-1, 1] over the template box, "
                           "Gram-Schmidt orthonormalised under the vertex-averaged inner product"},
                  {"terms", terms}};
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index s = 0; s < coefficients.rows(); ++s)
    {
        std::vector<double> row(static_cast<std::size_t>(coefficients.cols()));
        for (Eigen::Index c = 0; c < coefficients.cols(); ++c)
            row[c] = coefficients(s, c);
        rows.push_back(std::move(row));
    }
    j["coefficients"] = rows;
    j["attempts"] = attempts;
    return j;
}

} // namespace shapecomplete
