#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace oracle {

DensePca dense_covariance_pca(const std::vector<TriMesh>& meshes, double relative_floor)
{
    const auto s = static_cast<Eigen::Index>(meshes.size());
    const Eigen::Index d = meshes.front().coordinates().size();
    Eigen::MatrixXd x(d, s);
    for (Eigen::Index i = 0; i < s; ++i)
        x.col(i) = meshes[i].coordinates();
    DensePca out;
    out.mean = x.rowwise().mean();
    const Eigen::MatrixXd centred = x.colwise() - out.mean;
    const Eigen::MatrixXd cov = centred * centred.transpose() / static_cast<double>(s - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd& values = eig.eigenvalues(); // ascending
    const double top = values[d - 1];
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = d - 1; j >= 0; --j)
        if (values[j] > relative_floor * top)
            keep.push_back(j);
    out.modes.resize(d, static_cast<Eigen::Index>(keep.size()));
    out.std_devs.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k)
    {
        out.modes.col(k) = eig.eigenvectors().col(keep[k]);
        out.std_devs[k] = std::sqrt(values[keep[k]]);
    }
    return out;
}

double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    if (a.cols() != b.cols())
        return std::numbers::pi / 2;
    const Eigen::MatrixXd qa = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
    const Eigen::MatrixXd qb = Eigen::HouseholderQR<Eigen::MatrixXd>(b).householderQ() * Eigen::MatrixXd::Identity(b.rows(), b.cols());
    const Eigen::MatrixXd residual = qb - qa * (qa.transpose() * qb);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
    const double s = std::min(1.0, svd.singularValues().maxCoeff());
    return std::asin(s);
}

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& m, double rel_tol)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    Eigen::MatrixXd sinv = Eigen::MatrixXd::Zero(m.cols(), m.rows());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > rel_tol * sv[0])
            sinv(i, i) = 1.0 / sv[i];
    return svd.matrixV() * sinv * svd.matrixU().transpose();
}

Eigen::MatrixXd gauss_solve(Eigen::MatrixXd a, Eigen::MatrixXd rhs)
{
    const Eigen::Index n = a.rows();
    for (Eigen::Index col = 0; col < n; ++col)
    {
        Eigen::Index pivot = col;
        for (Eigen::Index r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col)))
                pivot = r;
        if (a(pivot, col) == 0.0)
            throw std::runtime_error("gauss_solve: singular");
        a.row(col).swap(a.row(pivot));
        rhs.row(col).swap(rhs.row(pivot));
        for (Eigen::Index r = col + 1; r < n; ++r)
        {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0)
                continue;
            for (Eigen::Index c = col; c < n; ++c)
                a(r, c) -= f * a(col, c);
            rhs.row(r) -= f * rhs.row(col);
        }
    }
    Eigen::MatrixXd x(n, rhs.cols());
    for (Eigen::Index r = n - 1; r >= 0; --r)
    {
        Eigen::RowVectorXd acc = rhs.row(r);
        for (Eigen::Index c = r + 1; c < n; ++c)
            acc -= a(r, c) * x.row(c);
        x.row(r) = acc / a(r, r);
    }
    return x;
}

Eigen::MatrixXd tps_dense_solution(const std::vector<Point3>& sources, const std::vector<Point3>& targets)
{
    const auto k = static_cast<Eigen::Index>(sources.size());
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(k + 4, k + 4);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(k + 4, 3);
    for (Eigen::Index i = 0; i < k; ++i)
    {
        for (Eigen::Index j = 0; j < k; ++j)
            l(i, j) = (sources[i] - sources[j]).norm();
        l(i, k) = 1.0;
        l(k, i) = 1.0;
        for (int d = 0; d < 3; ++d)
        {
            l(i, k + 1 + d) = sources[i][d];
            l(k + 1 + d, i) = sources[i][d];
        }
        rhs.row(i) = targets[i].transpose();
    }
    return gauss_solve(l, rhs);
}

double sampled_triangle_distance(const Point3& p, const Point3& a, const Point3& b, const Point3& c, int steps)
{
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; i + j <= steps; ++j)
        {
            const double u = static_cast<double>(i) / steps;
            const double v = static_cast<double>(j) / steps;
            const Point3 q = a + u * (b - a) + v * (c - a);
            best = std::min(best, (p - q).norm());
        }
    return best;
}

double refined_sampled_triangle_distance(const Point3& p, const Point3& a, const Point3& b, const Point3& c)
{
    constexpr int steps = 32;
    constexpr int levels = 60;
    double best = std::numeric_limits<double>::infinity();
    const auto sample = [&](const Point3& q) {
        const double d = (p - q).norm();
        best = std::min(best, d);
        return d;
    };

    // Edges: distance along a segment is convex in t, so the minimiser stays within one step of the best sample.
    const std::array<std::pair<Point3, Point3>, 3> edges = {{{a, b}, {b, c}, {c, a}}};
    for (const auto& [e0, e1] : edges)
    {
        double lo = 0.0, hi = 1.0;
        for (int level = 0; level < levels; ++level)
        {
            double bt = lo, bd = std::numeric_limits<double>::infinity();
            for (int i = 0; i <= steps; ++i)
            {
                const double t = lo + (hi - lo) * i / steps;
                const double d = sample(e0 + t * (e1 - e0));
                if (d < bd)
                {
                    bd = d;
                    bt = t;
                }
            }
            const double step = (hi - lo) / steps;
            lo = std::max(0.0, bt - step);
            hi = std::min(1.0, bt + step);
        }
    }

    // Interior: in orthonormal plane coordinates the distance grows with the in-plane offset from the
    // foot point, so the best grid sample is the one nearest to it.
    const Point3 n = (b - a).cross(c - a);
    if (n.norm() == 0.0)
        return best;
    const Point3 e1 = (b - a).normalized();
    const Point3 e2 = n.normalized().cross(e1);
    const auto inside = [&](const Point3& q) {
        const Point3 nq0 = (b - a).cross(q - a), nq1 = (c - b).cross(q - b), nq2 = (a - c).cross(q - c);
        return nq0.dot(n) >= 0.0 && nq1.dot(n) >= 0.0 && nq2.dot(n) >= 0.0;
    };
    Point3 centre = (a + b + c) / 3.0;
    double half = std::max({(a - centre).norm(), (b - centre).norm(), (c - centre).norm()});
    for (int level = 0; level < levels; ++level)
    {
        Point3 next = centre;
        double bd = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= steps; ++i)
            for (int j = 0; j <= steps; ++j)
            {
                const Point3 q = centre + (-half + 2.0 * half * i / steps) * e1 + (-half + 2.0 * half * j / steps) * e2;
                if (!inside(q))
                    continue;
                const double d = sample(q);
                if (d < bd)
                {
                    bd = d;
                    next = q;
                }
            }
        centre = next;
        half = 2.0 * (2.0 * half / steps);
    }
    return best;
}

double exhaustive_surface_distance(const Point3& p, const TriMesh& mesh)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : mesh.faces())
        best = std::min(best, shapecomplete::point_triangle_distance(p, mesh.vertex(f[0]), mesh.vertex(f[1]), mesh.vertex(f[2])));
    return best;
}

shapecomplete::ErrorStats naive_region_stats(const TriMesh& estimate, const TriMesh& truth, const VertexMask& region)
{
    shapecomplete::ErrorStats s;
    double sum = 0.0, sum_sq = 0.0, vert_sq = 0.0;
    for (std::size_t i = 0; i < region.size(); ++i)
    {
        if (!region[i])
            continue;
        const double d = exhaustive_surface_distance(estimate.vertex(i), truth);
        sum += d;
        sum_sq += d * d;
        s.max_surface = std::max(s.max_surface, d);
        vert_sq += (estimate.vertex(i) - truth.vertex(i)).squaredNorm();
        ++s.sample_count;
    }
    const double n = static_cast<double>(s.sample_count);
    s.mean_surface = sum / n;
    s.rms_surface = std::sqrt(sum_sq / n);
    s.rms_vertex = std::sqrt(vert_sq / n);
    return s;
}

VertexMask brute_force_seam(const TriMesh& mesh, const VertexMask& known)
{
    VertexMask seam(mesh.vertex_count());
    for (const auto& f : mesh.faces())
        for (int e = 0; e < 3; ++e)
        {
            const int a = f[e];
            const int b = f[(e + 1) % 3];
            if (known[a] && !known[b])
                seam.set(a);
            if (known[b] && !known[a])
                seam.set(b);
        }
    return seam;
}

TriMesh unit_tetrahedron()
{
    return TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}});
}

TriMesh unit_cube()
{
    std::vector<Point3> v;
    for (int i = 0; i < 8; ++i)
        v.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
    // Two triangles per face, outward orientation.
    std::vector<shapecomplete::Face> f = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
                                          {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
    return TriMesh(std::move(v), std::move(f));
}

TriMesh flat_grid(int n, double size, double height)
{
    std::vector<Point3> v;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            v.emplace_back(size * i / (n - 1), size * j / (n - 1), height);
    std::vector<shapecomplete::Face> f;
    for (int j = 0; j + 1 < n; ++j)
        for (int i = 0; i + 1 < n; ++i)
        {
            const int a = j * n + i;
            f.push_back({a, a + 1, a + n + 1});
            f.push_back({a, a + n + 1, a + n});
        }
    return TriMesh(std::move(v), std::move(f));
}

} // namespace oracle
