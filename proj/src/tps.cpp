#include "shapecomplete/tps.hpp"

#include "shapecomplete/error.hpp"

#include <Eigen/Dense>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <numeric>

namespace shapecomplete {

TpsWarp::TpsWarp(std::vector<Point3> knots, Eigen::MatrixX3d weights, Affine affine, double regularization)
    : knots_(std::move(knots)), weights_(std::move(weights)), affine_(affine), regularization_(regularization)
{
    if (static_cast<std::size_t>(weights_.rows()) != knots_.size())
        throw ConfigError("TPS needs one weight row per knot");
}

TpsWarp TpsWarp::identity()
{
    Affine a = Affine::Zero();
    a.leftCols<3>().setIdentity();
    return TpsWarp({}, Eigen::MatrixX3d(0, 3), a);
}

Point3 TpsWarp::affine_part(const Point3& p) const
{
    return affine_.leftCols<3>() * p + affine_.col(3);
}

Point3 TpsWarp::operator()(const Point3& p) const
{
    Point3 out = affine_part(p);
    for (std::size_t i = 0; i < knots_.size(); ++i)
        out += (p - knots_[i]).norm() * weights_.row(static_cast<Eigen::Index>(i)).transpose();
    return out;
}

std::vector<Point3> eval_tps(const TpsWarp& warp, std::span<const Point3> points)
{
    std::vector<Point3> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        out[i] = warp(points[i]);
    return out;
}

namespace {

void require_distinct(std::span<const Point3> pts)
{
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto less = [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(pts[a].data(), pts[a].data() + 3, pts[b].data(), pts[b].data() + 3);
    };
    std::sort(order.begin(), order.end(), less);
    for (std::size_t i = 1; i < order.size(); ++i)
        if (pts[order[i]] == pts[order[i - 1]])
            throw SingularError("TPS knots " + std::to_string(std::min(order[i], order[i - 1])) + " and " +
                                std::to_string(std::max(order[i], order[i - 1])) + " are duplicates");
}

} // namespace

TpsWarp fit_tps(std::span<const Point3> sources, std::span<const Point3> targets, double regularization)
{
    if (sources.size() != targets.size())
        throw ConfigError("fit_tps: " + std::to_string(sources.size()) + " sources but " +
                          std::to_string(targets.size()) + " targets");
    if (!(regularization >= 0.0))
        throw ConfigError("fit_tps: regularization must be >= 0");
    const auto k = static_cast<Eigen::Index>(sources.size());
    if (k < 4)
        throw SingularError("fit_tps: need at least 4 knots for a unique affine part, got " + std::to_string(k));
    require_distinct(sources);

    Point3 lo = sources[0], hi = sources[0];
    for (const Point3& p : sources)
    {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Point3 centre = 0.5 * (lo + hi);
    const double scale = 0.5 * (hi - lo).norm();

    Eigen::MatrixX3d local(k, 3);
    for (Eigen::Index i = 0; i < k; ++i)
        local.row(i) = ((sources[i] - centre) / scale).transpose();

    {
        const Eigen::MatrixX3d centred = local.rowwise() - local.colwise().mean();
        Eigen::JacobiSVD<Eigen::MatrixX3d> svd(centred);
        const Eigen::Vector3d sv = svd.singularValues();
        if (!(sv[2] > 1e-10 * sv[0]))
            throw SingularError("fit_tps: knots are coplanar (or collinear); the affine part is not determined");
    }

    const Eigen::Index n = k + 4;
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < k; ++i)
    {
        for (Eigen::Index j = i + 1; j < k; ++j)
        {
            const double r = (local.row(i) - local.row(j)).norm();
            system(i, j) = r;
            system(j, i) = r;
        }
        system(i, i) = regularization / scale;
        system(i, k) = 1.0;
        system(k, i) = 1.0;
        for (int d = 0; d < 3; ++d)
        {
            system(i, k + 1 + d) = local(i, d);
            system(k + 1 + d, i) = local(i, d);
        }
    }

    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 3);
    for (Eigen::Index i = 0; i < k; ++i)
        rhs.row(i) = targets[i].transpose();

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    Eigen::MatrixXd solution = lu.solve(rhs);
    solution += lu.solve(rhs - system * solution);
    if (!solution.allFinite())
        throw SingularError("fit_tps: the bordered system is singular");
    const double residual = (system * solution - rhs).norm();
    if (!(residual <= 1e-6 * (1.0 + rhs.norm())))
        throw SingularError("fit_tps: the bordered system is numerically singular (residual " +
                            std::to_string(residual) + ")");

    // Back to mm: |p' - c'| = |p - c| / scale and p' = (p - centre) / scale.
    Eigen::MatrixX3d weights = solution.topRows(k) / scale;
    const Eigen::Matrix3d linear_local = solution.bottomRows(3).transpose();
    const Eigen::Vector3d offset_local = solution.row(k).transpose();
    TpsWarp::Affine affine;
    affine.leftCols<3>() = linear_local / scale;
    affine.col(3) = offset_local - linear_local * centre / scale;

    return TpsWarp(std::vector<Point3>(sources.begin(), sources.end()), std::move(weights), affine, regularization);
}

} // namespace shapecomplete
