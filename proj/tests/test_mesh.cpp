#include "doctest.h"

#include "oracles.hpp"
#include "test_util.hpp"

#include "shapecomplete/error.hpp"
#include "shapecomplete/mesh.hpp"
#include "shapecomplete/ply.hpp"
#include "shapecomplete/synth.hpp"

#include <cmath>
#include <fstream>
#include <random>

using namespace shapecomplete;

namespace {

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream(path, std::ios::binary) << text;
}

const char* tetra_ascii = "ply\n"
                          "format ascii 1.0\n"
                          "comment unit tetrahedron\n"
                          "element vertex 4\n"
                          "property float x\n"
                          "property float y\n"
                          "property float z\n"
                          "element face 4\n"
                          "property list uchar int vertex_indices\n"
                          "end_header\n"
                          "0 0 0\n1 0 0\n0 1 0\n0 0 1\n"
                          "3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";

} // namespace

TEST_CASE("TriMesh rejects invariant violations")
{
    CHECK_THROWS_AS(TriMesh({{0, 0, 0}, {1, 0, 0}}, {{0, 1, 1}}), TopologyError);
    CHECK_THROWS_AS(TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {}), TopologyError);
    CHECK_THROWS_AS(TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 3}}), TopologyError);
    CHECK_THROWS_AS(TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, -1}}), TopologyError);
    CHECK_THROWS_AS(TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 1}}), TopologyError);
    CHECK_THROWS_AS(TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}, {{"a", VertexMask(4)}}), TopologyError);
    CHECK_NOTHROW(oracle::unit_tetrahedron());
}

TEST_CASE("VertexMask algebra")
{
    std::mt19937 rng(3);
    for (int trial = 0; trial < 50; ++trial)
    {
        const std::size_t n = 1 + rng() % 40;
        VertexMask a(n), b(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            a.set(i, rng() & 1);
            b.set(i, rng() & 1);
        }
        CHECK(a.complement().complement() == a);
        CHECK((a & b).is_subset_of(a));
        CHECK(a.is_subset_of(a | b));
        CHECK((a | a.complement()).all());
        CHECK((a & a.complement()).none());
        CHECK(VertexMask::from_indices(n, a.indices()) == a);
        CHECK(a.count() + a.complement().count() == n);
    }
    CHECK_THROWS_AS(VertexMask(3) | VertexMask(4), TopologyError);
    const std::vector<int> bad = {5};
    CHECK_THROWS_AS(VertexMask::from_indices(3, bad), TopologyError);
}

TEST_CASE("mesh_height")
{
    const TriMesh cube = oracle::unit_cube();
    CHECK(mesh_height(cube) == doctest::Approx(1.0));
    std::vector<Point3> moved = cube.vertices();
    for (Point3& p : moved)
        p += Point3(5, -2, 7);
    CHECK(mesh_height(cube.with_vertices(moved)) == doctest::Approx(1.0));
    CHECK(mesh_height(oracle::flat_grid(3, 1.0, 3.0)) == 0.0);
}

TEST_CASE("select_slab uses a closed interval")
{
    const TriMesh cube = oracle::unit_cube();
    const VertexMask top = select_slab(cube, 0.5, 1.0);
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(top[i] == (cube.vertex(i).z() == 1.0));
    CHECK(select_slab(cube, 0.0, 1.0).all());
    CHECK(select_slab(cube, 2.0, 3.0).none());
    CHECK(select_slab(cube, 1.0, 1.0).count() == 4);
    CHECK_THROWS_AS(select_slab(cube, 1.0, 0.0), ConfigError);
}

TEST_CASE("slab selection is monotone and idempotent")
{
    const TriMesh t = make_template(2);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> z(-110.0, 110.0);
    for (int trial = 0; trial < 100; ++trial)
    {
        double a = z(rng), b = z(rng);
        if (a > b)
            std::swap(a, b);
        std::uniform_real_distribution<double> inner(a, b);
        double c = inner(rng), d = inner(rng);
        if (c > d)
            std::swap(c, d);
        const VertexMask outer = select_slab(t, a, b);
        CHECK(select_slab(t, c, d).is_subset_of(outer));
        CHECK(select_slab(t, a, b) == outer);
    }
}

TEST_CASE("build_prior_mask")
{
    const TriMesh t = make_template(3);
    const VertexMask& cup = t.label("acetabulum");

    double cup_lo = 1e300, cup_hi = -1e300, lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < t.vertex_count(); ++i)
    {
        const double z = t.vertex(i).z();
        lo = std::min(lo, z);
        hi = std::max(hi, z);
        if (cup[i])
        {
            cup_lo = std::min(cup_lo, z);
            cup_hi = std::max(cup_hi, z);
        }
    }

    SUBCASE("zero crest is the acetabulum slab alone")
    {
        const VertexMask m = build_prior_mask(t, cup, 0.0);
        for (std::size_t i = 0; i < t.vertex_count(); ++i)
        {
            const double z = t.vertex(i).z();
            CHECK(m[i] == (z >= cup_lo && z <= cup_hi));
        }
        CHECK(cup.is_subset_of(m));
        CHECK(m.count() > cup.count());
    }
    SUBCASE("full crest covers everything")
    {
        CHECK(build_prior_mask(t, cup, 1.0).all());
    }
    SUBCASE("5 percent matches a direct threshold scan")
    {
        const VertexMask m = build_prior_mask(t, cup, 0.05);
        const double cut = hi - 0.05 * (hi - lo);
        for (std::size_t i = 0; i < t.vertex_count(); ++i)
        {
            const double z = t.vertex(i).z();
            CHECK(m[i] == ((z >= cup_lo && z <= cup_hi) || (z >= cut && z <= hi)));
        }
    }
    SUBCASE("monotone in the crest fraction")
    {
        VertexMask prev = build_prior_mask(t, cup, 0.0);
        for (double f = 0.01; f <= 1.0; f += 0.01)
        {
            const VertexMask cur = build_prior_mask(t, cup, f);
            CHECK(prev.is_subset_of(cur));
            prev = cur;
        }
    }
    SUBCASE("errors")
    {
        CHECK_THROWS_AS(build_prior_mask(t, VertexMask(t.vertex_count()), 0.05), ConfigError);
        CHECK_THROWS_AS(build_prior_mask(t, cup, 1.5), ConfigError);
        CHECK_THROWS_AS(build_prior_mask(t, cup, -0.1), ConfigError);
        CHECK_THROWS_AS(build_prior_mask(t, VertexMask(3, true), 0.05), TopologyError);
    }
}

TEST_CASE("seam_vertices")
{
    const TriMesh cube = oracle::unit_cube();
    CHECK(seam_vertices(cube, VertexMask(8, true)).none());
    CHECK(seam_vertices(cube, VertexMask(8, false)).none());

    // Bottom face known: every bottom vertex touches the top through a side edge.
    const VertexMask bottom = select_slab(cube, 0.0, 0.0);
    const VertexMask seam = seam_vertices(cube, bottom);
    CHECK(seam == oracle::brute_force_seam(cube, bottom));
    CHECK(seam == bottom);

    SUBCASE("random masks on the template agree with an edge scan")
    {
        const TriMesh t = make_template(2);
        std::mt19937 rng(5);
        for (int trial = 0; trial < 30; ++trial)
        {
            VertexMask known(t.vertex_count());
            for (std::size_t i = 0; i < known.size(); ++i)
                known.set(i, rng() % 3 == 0);
            const VertexMask s = seam_vertices(t, known);
            CHECK(s == oracle::brute_force_seam(t, known));
            CHECK(s.is_subset_of(known));
        }
    }
}

TEST_CASE("permute_axes")
{
    const TriMesh t = oracle::unit_tetrahedron();
    const TriMesh p = permute_axes(t, "zxy");
    CHECK(p.vertex(1) == Point3(0, 1, 0));
    CHECK(p.vertex(3) == Point3(1, 0, 0));
    CHECK(permute_axes(t, "xyz") == t);
    CHECK_THROWS_AS(permute_axes(t, "xxy"), ConfigError);
    CHECK_THROWS_AS(permute_axes(t, "xy"), ConfigError);
}

TEST_CASE("mask files round-trip")
{
    VertexMask m(7);
    m.set(1);
    m.set(6);
    const std::string path = testutil::scratch("mask.txt");
    save_mask(m, path);
    CHECK(load_mask(path) == m);

    write_file(path, "vertex_mask 3\n1\n0\n");
    CHECK_THROWS_AS(load_mask(path), FormatError);
    write_file(path, "something 3\n1\n0\n1\n");
    CHECK_THROWS_AS(load_mask(path), FormatError);
    CHECK_THROWS_AS(load_mask(testutil::scratch("missing_mask.txt")), IoError);
}

TEST_CASE("PLY reading")
{
    const std::string path = testutil::scratch("tetra.ply");
    write_file(path, tetra_ascii);
    const TriMesh t = load_mesh(path);
    CHECK(t.vertex_count() == 4);
    CHECK(t.face_count() == 4);
    CHECK(t == oracle::unit_tetrahedron());
    CHECK_FALSE(load_mesh_with_scalars(path).quality.has_value());

    SUBCASE("out-of-range face index")
    {
        std::string text = tetra_ascii;
        text.replace(text.find("3 1 2 3\n"), 8, "3 1 2 9\n");
        write_file(path, text);
        CHECK_THROWS_AS(load_mesh(path), TopologyError);
    }
    SUBCASE("truncated body")
    {
        std::string text = tetra_ascii;
        text.resize(text.size() - 8);
        write_file(path, text);
        CHECK_THROWS_AS(load_mesh(path), FormatError);
    }
    SUBCASE("big-endian rejected")
    {
        std::string text = tetra_ascii;
        text.replace(text.find("ascii"), 5, "binary_big_endian");
        write_file(path, text);
        CHECK_THROWS_AS(load_mesh(path), FormatError);
    }
    SUBCASE("not a PLY")
    {
        write_file(path, "solid foo\n");
        CHECK_THROWS_AS(load_mesh(path), FormatError);
        CHECK_THROWS_AS(load_mesh(testutil::scratch("nope.ply")), IoError);
    }
    SUBCASE("quads rejected")
    {
        std::string text = tetra_ascii;
        text.replace(text.find("3 1 2 3\n"), 8, "4 1 2 3 0\n");
        write_file(path, text);
        CHECK_THROWS_AS(load_mesh(path), FormatError);
    }
    SUBCASE("extra elements and properties are skipped")
    {
        const std::string text = "ply\nformat ascii 1.0\n"
                                 "element vertex 4\nproperty double x\nproperty double y\nproperty double z\n"
                                 "property uchar red\nproperty int label\n"
                                 "element face 4\nproperty list uchar uint vertex_indices\nproperty float area\n"
                                 "element edge 1\nproperty int v1\nproperty int v2\n"
                                 "end_header\n"
                                 "0 0 0 9 1\n1 0 0 9 0\n0 1 0 9 2\n0 0 1 9 0\n"
                                 "3 0 2 1 0.5\n3 0 1 3 0.5\n3 0 3 2 0.5\n3 1 2 3 0.5\n"
                                 "0 1\n";
        write_file(path, text);
        const TriMesh m = load_mesh(path);
        CHECK(m.vertices() == oracle::unit_tetrahedron().vertices());
        CHECK(m.label("acetabulum").indices() == std::vector<int>{0});
        CHECK(m.label("crest").indices() == std::vector<int>{2});
    }
}

TEST_CASE("PLY writing round-trips")
{
    const TriMesh tetra = oracle::unit_tetrahedron();
    for (PlyEncoding enc : {PlyEncoding::ascii, PlyEncoding::binary_little_endian})
    {
        CAPTURE(static_cast<int>(enc));
        const std::string path = testutil::scratch("rt.ply");

        save_mesh(tetra, path, std::nullopt, enc);
        const PlyContents plain = load_mesh_with_scalars(path);
        CHECK(plain.mesh == tetra);
        CHECK_FALSE(plain.quality.has_value());

        const std::vector<double> zeros(4, 0.0);
        save_mesh(tetra, path, std::span<const double>(zeros), enc);
        const PlyContents with = load_mesh_with_scalars(path);
        REQUIRE(with.quality.has_value());
        CHECK(*with.quality == zeros);

        const std::vector<double> three(3, 0.0);
        CHECK_THROWS_AS(save_mesh(tetra, path, std::span<const double>(three), enc), TopologyError);

        const TriMesh t = make_template(3);
        std::vector<double> field(t.vertex_count());
        for (std::size_t i = 0; i < field.size(); ++i)
            field[i] = i % 5 == 0 ? -1.0 : 0.01 * static_cast<double>(i);
        save_mesh(t, path, std::span<const double>(field), enc);
        const PlyContents back = load_mesh_with_scalars(path);
        CHECK(back.mesh.faces() == t.faces());
        CHECK(back.mesh.labels() == t.labels());
        double worst = 0.0, worst_q = 0.0;
        for (std::size_t i = 0; i < t.vertex_count(); ++i)
        {
            // float32 keeps about 7 significant digits; coordinates here are up to ~100 mm.
            worst = std::max(worst, (back.mesh.vertex(i) - t.vertex(i)).cwiseAbs().maxCoeff() /
                                        std::max(1.0, t.vertex(i).cwiseAbs().maxCoeff()));
            worst_q = std::max(worst_q, std::abs((*back.quality)[i] - field[i]));
        }
        CHECK(worst < 1e-6);
        CHECK(worst_q < 1e-6);
    }
    CHECK_THROWS_AS(save_mesh(tetra, testutil::scratch("no_dir/x.ply")), IoError);
}

TEST_CASE("PLY round-trip is exact for float32-representable coordinates")
{
    std::mt19937 rng(17);
    std::uniform_real_distribution<float> u(-100.0f, 100.0f);
    const TriMesh t = make_template(1);
    for (int trial = 0; trial < 10; ++trial)
    {
        std::vector<Point3> v(t.vertex_count());
        for (Point3& p : v)
            p = Point3(u(rng), u(rng), u(rng));
        const TriMesh m = t.with_vertices(v);
        const std::string path = testutil::scratch("exact.ply");
        save_mesh(m, path, std::nullopt, trial % 2 ? PlyEncoding::ascii : PlyEncoding::binary_little_endian);
        CHECK(load_mesh(path) == m);
    }
}

TEST_CASE("label codes")
{
    CHECK(label_name(1) == "acetabulum");
    CHECK(label_name(2) == "crest");
    CHECK(label_name(7) == "label_7");
    for (int c = 1; c < 20; ++c)
        CHECK(label_code(label_name(c)) == c);
    CHECK_THROWS_AS(label_code("pubis"), ConfigError);

    VertexMask a(4), b(4);
    a.set(0);
    b.set(0);
    const TriMesh overlapping = oracle::unit_tetrahedron().with_labels({{"acetabulum", a}, {"crest", b}});
    CHECK_THROWS_AS(save_mesh(overlapping, testutil::scratch("overlap.ply")), ConfigError);
}
