#include "doctest.h"

#include "oracles.hpp"

#include "shapecomplete/error.hpp"
#include "shapecomplete/metrics.hpp"
#include "shapecomplete/shape_model.hpp"
#include "shapecomplete/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace shapecomplete;

TEST_CASE("point_triangle_distance basics")
{
    const Point3 a(0, 0, 0), b(2, 0, 0), c(0, 2, 0);
    CHECK(point_triangle_distance(a, a, b, c) == 0.0);
    const Point3 centroid = (a + b + c) / 3.0;
    CHECK(point_triangle_distance(centroid + 1.5 * Point3::UnitZ(), a, b, c) == doctest::Approx(1.5));
    CHECK(point_triangle_distance(centroid - 0.25 * Point3::UnitZ(), a, b, c) == doctest::Approx(0.25));
    // Beyond edge ab: distance to the segment.
    CHECK(point_triangle_distance(Point3(1, -3, 4), a, b, c) == doctest::Approx(5.0));
    // Vertex region of b.
    CHECK(point_triangle_distance(Point3(5, -4, 0), a, b, c) == doctest::Approx(5.0));
}

TEST_CASE("point_triangle_distance agrees with dense sampling")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    // 10^4-ish barycentric samples: 140 steps per edge gives 10011 points.
    // Sampling can only overestimate; spacing 1/140 of an edge bounds the gap.
    for (int trial = 0; trial < 300; ++trial)
    {
        const Point3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), c(u(rng), u(rng), u(rng));
        const Point3 p = 2.0 * Point3(u(rng), u(rng), u(rng));
        const double exact = point_triangle_distance(p, a, b, c);
        const double sampled = oracle::sampled_triangle_distance(p, a, b, c, 140);
        const double spacing = std::max({(b - a).norm(), (c - a).norm(), (c - b).norm()}) / 140.0;
        CHECK(exact <= sampled + 1e-12);
        CHECK(sampled - exact <= spacing);
    }
}

TEST_CASE("point_triangle_distance agrees with refined sampling")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int trial = 0; trial < 200; ++trial)
    {
        const Point3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), c(u(rng), u(rng), u(rng));
        const Point3 p(u(rng), u(rng), u(rng));
        CHECK(std::abs(point_triangle_distance(p, a, b, c) - oracle::refined_sampled_triangle_distance(p, a, b, c)) <
              1e-9);
    }
}

TEST_CASE("degenerate triangles fall back to segments and points")
{
    const Point3 a(0, 0, 0), b(1, 0, 0);
    CHECK(point_triangle_distance(Point3(0.5, 2, 0), a, b, Point3(0.5, 0, 0)) == doctest::Approx(2.0));
    CHECK(point_triangle_distance(Point3(3, 0, 0), a, b, b) == doctest::Approx(2.0));
    CHECK(point_triangle_distance(Point3(0, 0, 4), a, a, a) == doctest::Approx(4.0));
    CHECK(std::isfinite(point_triangle_distance(Point3(0.2, 0.3, 0.1), a, b, Point3(2, 0, 0))));
}

TEST_CASE("surface_distance equals the exhaustive scan")
{
    const TriMesh mesh = make_template(2);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-120.0, 120.0);

    SUBCASE("random points")
    {
        std::vector<Point3> pts(1000);
        for (Point3& p : pts)
            p = Point3(u(rng), u(rng), u(rng));
        const std::vector<double> fast = surface_distance(pts, mesh);
        for (std::size_t i = 0; i < pts.size(); ++i)
            CHECK(fast[i] == oracle::exhaustive_surface_distance(pts[i], mesh));
    }
    SUBCASE("own vertices are at distance zero")
    {
        for (double d : surface_distance(mesh.vertices(), mesh))
            CHECK(d == 0.0);
    }
    SUBCASE("point above a square")
    {
        const TriMesh sq = oracle::flat_grid(2, 1.0);
        const std::vector<Point3> p = {{0.5, 0.5, 2.0}};
        CHECK(surface_distance(p, sq)[0] == doctest::Approx(2.0));
    }
}

TEST_CASE("surface distance is one-sided")
{
    // A small patch lying on a large plane: patch -> plane is 0, plane -> patch is not.
    const TriMesh big = oracle::flat_grid(3, 10.0);
    const TriMesh small = oracle::flat_grid(3, 1.0);
    double forward = 0.0, backward = 0.0;
    for (double d : surface_distance(small.vertices(), big))
        forward = std::max(forward, d);
    for (double d : surface_distance(big.vertices(), small))
        backward = std::max(backward, d);
    CHECK(forward == 0.0);
    CHECK(backward > 5.0);
}

TEST_CASE("region_error_stats")
{
    SUBCASE("identical meshes")
    {
        const TriMesh t = make_template(2);
        const ErrorStats s = region_error_stats(t, t, VertexMask(t.vertex_count(), true));
        CHECK(s.rms_surface == 0.0);
        CHECK(s.max_surface == 0.0);
        CHECK(s.mean_surface == 0.0);
        CHECK(s.rms_vertex == 0.0);
        CHECK(s.sample_count == t.vertex_count());
    }
    SUBCASE("uniform normal offset of a flat region")
    {
        const TriMesh truth = oracle::flat_grid(6, 10.0);
        const TriMesh est = oracle::flat_grid(6, 10.0, 1.0);
        const ErrorStats s = region_error_stats(est, truth, VertexMask(truth.vertex_count(), true));
        CHECK(std::abs(s.mean_surface - 1.0) < 1e-6);
        CHECK(std::abs(s.rms_surface - 1.0) < 1e-6);
        CHECK(std::abs(s.max_surface - 1.0) < 1e-6);
        CHECK(std::abs(s.rms_vertex - 1.0) < 1e-6);
    }
    SUBCASE("synthetic instance matches direct loops")
    {
        SynthSpec spec;
        spec.template_resolution = 3;
        const Population pop = generate_population(spec);
        const std::vector<TriMesh> rest(pop.meshes.begin() + 1, pop.meshes.end());
        const Ssm ssm = build_ssm(rest);
        const TriMesh& truth = pop.meshes.front();
        const VertexMask known = build_prior_mask(truth, truth.label("acetabulum"), 0.05);
        const TriMesh est = synthesize(ssm, project_partial(ssm, truth, known));
        const VertexMask region = known.complement();

        const ErrorStats s = region_error_stats(est, truth, region);
        const ErrorStats ref = oracle::naive_region_stats(est, truth, region);
        CHECK(s.sample_count == ref.sample_count);
        CHECK(std::abs(s.mean_surface - ref.mean_surface) < 1e-9);
        CHECK(std::abs(s.rms_surface - ref.rms_surface) < 1e-9);
        CHECK(std::abs(s.max_surface - ref.max_surface) < 1e-9);
        CHECK(std::abs(s.rms_vertex - ref.rms_vertex) < 1e-9);

        CHECK(s.mean_surface <= s.rms_surface);
        CHECK(s.rms_surface <= s.max_surface);

        const RegionErrors e = region_errors(est, truth, region);
        REQUIRE(e.vertices == region.indices());
        for (std::size_t k = 0; k < e.vertices.size(); ++k)
            CHECK(e.surface[k] <= e.vertex[k] + 1e-12);
    }
    SUBCASE("errors")
    {
        const TriMesh t = make_template(1);
        CHECK_THROWS_AS(region_error_stats(t, t, VertexMask(t.vertex_count())), ConfigError);
        CHECK_THROWS_AS(region_error_stats(t, make_template(2), VertexMask(t.vertex_count(), true)), TopologyError);
        CHECK_THROWS_AS(region_error_stats(t, t, VertexMask(3, true)), TopologyError);
    }
}

TEST_CASE("stats ordering on random perturbations")
{
    const TriMesh t = make_template(2);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial)
    {
        std::vector<Point3> v = t.vertices();
        for (Point3& p : v)
            p += (trial + 1) * 0.1 * Point3(n(rng), n(rng), n(rng));
        VertexMask region(t.vertex_count());
        for (std::size_t i = 0; i < region.size(); ++i)
            region.set(i, rng() % 4 != 0);
        const ErrorStats s = region_error_stats(t.with_vertices(v), t, region);
        CHECK(0.0 <= s.mean_surface);
        CHECK(s.mean_surface <= s.rms_surface);
        CHECK(s.rms_surface <= s.max_surface);
    }
}

TEST_CASE("seam_gap")
{
    const TriMesh t = make_template(2);
    const VertexMask known = build_prior_mask(t, t.label("acetabulum"), 0.1);
    CHECK(seam_gap(t, known, t) == 0.0);
    std::vector<Point3> moved = t.vertices();
    for (Point3& p : moved)
        p += Point3(0, 2, 0);
    CHECK(seam_gap(t, known, t.with_vertices(moved)) == doctest::Approx(2.0));
    CHECK_THROWS_AS(seam_gap(t, VertexMask(t.vertex_count(), true), t), TopologyError);
}
