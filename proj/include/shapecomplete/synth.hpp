#pragma once

#include "shapecomplete/mesh.hpp"

#include "json.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace shapecomplete {

/**
 * Closed genus-0 hemipelvis proxy built from a subdivided icosahedron.
 *
 * Roughly 135 x 35 x 200 mm (x, y, z): a thin upper blade that widens toward
 * the top of the z range and a thicker lower body with a spherical cup
 * depression on the +y side. Labels: "acetabulum" (cup vertices) and "crest"
 * (top tenth of the height). Resolution r gives 10 * 4^r + 2 vertices.
 */
TriMesh make_template(int resolution);

/// One smooth displacement field: direction * cos(pi * frequency * (q_axis + 1) / 2).
struct BasisTerm
{
    int axis = 2;      ///< spatial axis of the argument (0 = x, 1 = y, 2 = z)
    int frequency = 1;
    int direction = 0; ///< displacement axis
};

struct SynthSpec
{
    int template_resolution = 4;
    int generative_modes = 10;
    /// Per-mode coefficient std (mm of RMS vertex displacement). Empty selects a geometric 3.0 -> 0.3 ramp.
    std::vector<double> coefficient_sigma;
    double noise_sigma = 0.2;
    int sample_count = 42;
    std::uint64_t seed = 7;

    /// Throws ConfigError unless g >= 1, S >= g + 2 and all sigmas are >= 0.
    void validate() const;
    std::vector<double> resolved_sigma() const;
};

struct GroundTruth
{
    std::vector<BasisTerm> basis;
    std::vector<double> coefficient_sigma;
    /// Orthonormal under the vertex-averaged inner product (1/N) sum_v a_v . b_v; 3N x g.
    Eigen::MatrixXd mode_fields;
    /// S x g coefficient draws.
    Eigen::MatrixXd coefficients;
    std::vector<int> attempts;
    std::uint64_t seed = 0;
    double noise_sigma = 0.0;

    /// Coefficients, basis description, seed; the fields themselves are omitted.
    nlohmann::json to_json() const;
};

struct Population
{
    TriMesh template_mesh;
    std::vector<TriMesh> meshes;
    GroundTruth truth;
};

/// Orthonormalised generative fields on a template (3N x g).
Eigen::MatrixXd generative_fields(const TriMesh& template_mesh, int mode_count, std::vector<BasisTerm>* basis = nullptr);

/**
 * Shape s = template + sum_j c_sj * field_j + iid Gaussian jitter per coordinate.
 *
 * Each shape draws from its own stream seeded by (seed, shape index,
 * attempt); draws that flip a triangle relative to the template are redrawn
 * up to 32 times.
 */
Population generate_population(const SynthSpec& spec);

} // namespace shapecomplete
