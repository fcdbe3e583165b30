#pragma once

#include "shapecomplete/mesh.hpp"

#include "json.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace shapecomplete {

/**
 * PCA statistical shape model over corresponded meshes.
 *
 * A shape with N vertices is the stacked vector (x0, y0, z0, x1, ...) of
 * length 3N. The model holds the mean shape, a 3N x k matrix of orthonormal
 * modes, and per-mode sample standard deviations (nonincreasing). The
 * template connectivity travels with the model so synthesized shapes are
 * full meshes.
 */
class Ssm
{
public:
    /// Validates orthonormality (1e-8), ordering of std_devs and k <= training_count - 1.
    Ssm(Eigen::VectorXd mean, Eigen::MatrixXd modes, Eigen::VectorXd std_devs, std::vector<Face> faces,
        std::size_t training_count);

    std::size_t vertex_count() const noexcept { return static_cast<std::size_t>(mean_.size() / 3); }
    std::size_t mode_count() const noexcept { return static_cast<std::size_t>(modes_.cols()); }
    std::size_t training_count() const noexcept { return training_count_; }

    const Eigen::VectorXd& mean() const noexcept { return mean_; }
    const Eigen::MatrixXd& modes() const noexcept { return modes_; }
    const Eigen::VectorXd& std_devs() const noexcept { return std_devs_; }
    const std::vector<Face>& faces() const noexcept { return faces_; }

    TriMesh mean_mesh() const;

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd modes_;
    Eigen::VectorXd std_devs_;
    std::vector<Face> faces_;
    std::size_t training_count_;
};

/// Coefficients in the mode basis, in mm.
struct ModeCoefficients
{
    Eigen::VectorXd b;

    /// b / std_devs, in standard deviations.
    Eigen::VectorXd normalized(const Ssm& ssm) const;
};

/// Modes with variance below this fraction of the largest are dropped.
inline constexpr double zero_variance_threshold = 1e-12;

/**
 * Builds the model with the snapshot method: eigen-decomposition of the
 * S x S Gram matrix of centred shapes (covariance divisor S - 1). Each mode
 * is oriented so its largest-magnitude entry is positive.
 *
 * Inputs must be pre-aligned and share one connectivity.
 */
Ssm build_ssm(std::span<const TriMesh> meshes);

/// b = modes^T (x - mean).
ModeCoefficients project_full(const Ssm& ssm, const TriMesh& mesh);

/**
 * Least-squares coefficients from the known vertices only.
 *
 * Minimises |R(mean + modes b) - R(x)|^2 + tikhonov * sum_j (b_j / sigma_j)^2
 * where R keeps the coordinates of known vertices. Solved with a complete
 * orthogonal decomposition, so a rank-deficient restriction yields the
 * minimum-norm minimiser.
 *
 * `known_points` lists the known vertices in ascending index order.
 */
ModeCoefficients project_partial(const Ssm& ssm, std::span<const Point3> known_points, const VertexMask& known,
                                 double tikhonov = 0.0);

/// Accepts either the full-topology prior or a mesh holding only the known vertices.
ModeCoefficients project_partial(const Ssm& ssm, const TriMesh& partial, const VertexMask& known,
                                 double tikhonov = 0.0);

/// Mesh with vertices mean + modes b and the template connectivity.
TriMesh synthesize(const Ssm& ssm, const ModeCoefficients& coeffs);

inline constexpr std::uint32_t ssm_format_version = 1;

/**
 * Binary model file plus a JSON sidecar at `path + ".json"`.
 *
 * Layout (all integers and reals little-endian):
 *   "SHAPESSM" magic, uint32 version
 *   then chunks of { char tag[4], uint64 byte_length, payload }:
 *     HEAD  uint64 N, uint64 k, uint64 face count F, uint64 training count S
 *     MEAN  float64[3N]
 *     MODE  float64[3N * k], column-major
 *     SDEV  float64[k]
 *     FACE  int32[3F]
 *     END!  empty
 */
void save_ssm(const Ssm& ssm, const std::string& path, const nlohmann::json& provenance = nlohmann::json::object());
Ssm load_ssm(const std::string& path);

} // namespace shapecomplete
