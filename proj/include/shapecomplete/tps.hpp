#pragma once

#include "shapecomplete/mesh.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace shapecomplete {

/**
 * 3D thin-plate spline f(p) = L p + t + sum_i w_i |p - c_i| with kernel U(r) = r.
 *
 * The weights satisfy the side conditions sum_i w_i = 0 and
 * sum_i w_i c_i^T = 0, so the radial part vanishes on affine functions.
 */
class TpsWarp
{
public:
    using Affine = Eigen::Matrix<double, 3, 4>;

    TpsWarp(std::vector<Point3> knots, Eigen::MatrixX3d weights, Affine affine, double regularization = 0.0);

    /// Identity map with no knots.
    static TpsWarp identity();

    const std::vector<Point3>& knots() const noexcept { return knots_; }
    const Eigen::MatrixX3d& weights() const noexcept { return weights_; }
    /// Columns 0..2 linear part, column 3 translation.
    const Affine& affine() const noexcept { return affine_; }
    double regularization() const noexcept { return regularization_; }

    Point3 operator()(const Point3& p) const;
    Point3 affine_part(const Point3& p) const;

private:
    std::vector<Point3> knots_;
    Eigen::MatrixX3d weights_;
    Affine affine_;
    double regularization_;
};

/**
 * Fits the spline mapping sources[i] to targets[i].
 *
 * Solves the (K+4) x (K+4) bordered system in centred, scaled coordinates.
 * With regularization 0 the warp interpolates every knot exactly; a positive
 * value is added to the kernel diagonal (mm) and relaxes interpolation.
 * Throws SingularError for fewer than 4 knots, duplicate knots, or coplanar
 * knots.
 */
TpsWarp fit_tps(std::span<const Point3> sources, std::span<const Point3> targets, double regularization = 0.0);

std::vector<Point3> eval_tps(const TpsWarp& warp, std::span<const Point3> points);

} // namespace shapecomplete
