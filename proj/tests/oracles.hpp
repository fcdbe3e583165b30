#pragma once

// Reference computations for tests. Deliberately naive and independent of
// the library's algorithms (no Gram trick, no BVH, no Eigen solvers for TPS).

#include "shapecomplete/mesh.hpp"
#include "shapecomplete/metrics.hpp"

#include <Eigen/Dense>

#include <array>
#include <set>
#include <vector>

namespace oracle {

using shapecomplete::Point3;
using shapecomplete::TriMesh;
using shapecomplete::VertexMask;

struct DensePca
{
    Eigen::VectorXd mean;
    Eigen::MatrixXd modes;   // 3N x k, descending variance
    Eigen::VectorXd std_devs;
};

/// Eigen-decomposition of the explicit 3N x 3N sample covariance (divisor S - 1).
DensePca dense_covariance_pca(const std::vector<TriMesh>& meshes, double relative_floor = 1e-12);

/// Largest principal angle between the column spans of A and B (radians); sine-based for small angles.
double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Moore-Penrose pseudoinverse by SVD with relative cutoff.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

/// Gaussian elimination with partial pivoting on a dense copy; rhs may have several columns.
Eigen::MatrixXd gauss_solve(Eigen::MatrixXd a, Eigen::MatrixXd rhs);

/// Bordered TPS system with kernel |r| in raw coordinates; returns (K + 4) x 3 solution [weights; affine rows].
Eigen::MatrixXd tps_dense_solution(const std::vector<Point3>& sources, const std::vector<Point3>& targets);

/// Minimum distance from p to triangle abc by dense barycentric sampling (`steps` per edge).
double sampled_triangle_distance(const Point3& p, const Point3& a, const Point3& b, const Point3& c, int steps);

/// min over every face of the library's point_triangle_distance.
/// Sampling with local refinement: 1D zoom along each edge plus a 2D zoom over the interior in plane coordinates.
double refined_sampled_triangle_distance(const Point3& p, const Point3& a, const Point3& b, const Point3& c);

double exhaustive_surface_distance(const Point3& p, const TriMesh& mesh);

/// Direct loops, no spatial index.
shapecomplete::ErrorStats naive_region_stats(const TriMesh& estimate, const TriMesh& truth, const VertexMask& region);

/// Seam by scanning every face edge.
VertexMask brute_force_seam(const TriMesh& mesh, const VertexMask& known);

// -- small fixtures ----------------------------------------------------------

TriMesh unit_tetrahedron();
/// Axis-aligned cube [0,1]^3, 8 vertices, 12 triangles.
TriMesh unit_cube();
/// n x n vertex grid in the plane z = height, spanning [0, size]^2.
TriMesh flat_grid(int n, double size, double height = 0.0);

} // namespace oracle
