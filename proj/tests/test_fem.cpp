#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bctopt/fem.hpp"
#include "bctopt/mesh.hpp"
#include "bctopt/sparse.hpp"
#include "test_helpers.hpp"

using namespace bctopt;

namespace {

double max_abs(const NodalField& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double entry(const SparseOperator& a, int row, int col) {
  const auto rows = a.row_pointers();
  const auto cols = a.columns();
  const auto vals = a.values();
  for (int k = rows[static_cast<std::size_t>(row)]; k < rows[static_cast<std::size_t>(row) + 1]; ++k)
    if (cols[static_cast<std::size_t>(k)] == col) return vals[static_cast<std::size_t>(k)];
  return 0.0;
}

}  // namespace

TEST_CASE("sparse operator sums duplicate triplets and multiplies correctly") {
  // [[2, 1], [1, 3]] assembled from split triplets
  const SparseOperator a = SparseOperator::from_triplets(
      2, {{0, 0, 1.0}, {0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0}});
  CHECK(a.size() == 2);
  CHECK(a.nonzero_count() == 4);
  const std::vector<double> y = a.multiply({1.0, 2.0});
  CHECK(y[0] == doctest::Approx(4.0));
  CHECK(y[1] == doctest::Approx(7.0));
  CHECK(a.inner(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 1.0}) ==
        doctest::Approx(1.0));
  CHECK(a.diagonal() == std::vector<double>{2.0, 3.0});
  CHECK(a.is_symmetric(1e-14));
  const SparseOperator skew = SparseOperator::from_triplets(2, {{0, 1, 1.0}, {1, 0, -1.0}});
  CHECK_FALSE(skew.is_symmetric(1e-14));
}

TEST_CASE("conjugate gradient solves a small SPD system and reports failure") {
  const SparseOperator a = SparseOperator::from_triplets(
      2, {{0, 0, 4.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0}});
  std::vector<double> x(2, 0.0);
  const CgResult result = conjugate_gradient(a, std::vector<double>{1.0, 2.0}, x, {1e-14});
  CHECK(result.rel_residual <= 1e-14);
  CHECK(x[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(7.0 / 11.0).epsilon(1e-12));

  // an unreachable tolerance on a larger system must be reported, not looped
  const int n = 30;
  std::vector<Triplet> triplets;
  for (int i = 0; i < n; ++i) {
    triplets.push_back({i, i, 2.0});
    if (i + 1 < n) {
      triplets.push_back({i, i + 1, -1.0});
      triplets.push_back({i + 1, i, -1.0});
    }
  }
  const SparseOperator laplacian = SparseOperator::from_triplets(n, std::move(triplets));
  std::vector<double> rhs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rhs[static_cast<std::size_t>(i)] = std::sin(1.0 + i);
  std::vector<double> y(static_cast<std::size_t>(n), 0.0);
  CHECK_THROWS_AS(conjugate_gradient(laplacian, rhs, y, CgOptions{1e-30, 1}), SolveError);
}

TEST_CASE("stiffness matrix is symmetric with zero row sums") {
  const Mesh mesh = generate_ellipsoid_mesh(1.0, 0.5, 1.0, 3);
  const SparseOperator k = assemble_stiffness(mesh);
  CHECK(k.size() == mesh.vertex_count());
  CHECK(k.is_symmetric(1e-12));
  // constants lie in the kernel: K * 1 = 0
  const std::vector<double> ones(static_cast<std::size_t>(mesh.vertex_count()), 1.0);
  CHECK(max_abs(k.multiply(ones)) <= 1e-12);
  for (double d : k.diagonal()) CHECK(d > 0.0);
}

TEST_CASE("single-tet element matrices match the textbook values") {
  const Mesh mesh = test_helpers::unit_tet_mesh();
  const double vol = 1.0 / 6.0;

  const SparseOperator m = assemble_mass(mesh);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(entry(m, i, j) == doctest::Approx(i == j ? vol / 10.0 : vol / 20.0).epsilon(1e-13));

  // P1 gradients on the corner simplex: grad(phi_0) = (-1,-1,-1),
  // grad(phi_i) = e_i, so K = vol * G G^T.
  const SparseOperator k = assemble_stiffness(mesh);
  const double g[4][3] = {{-1, -1, -1}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double expected =
          vol * (g[i][0] * g[j][0] + g[i][1] * g[j][1] + g[i][2] * g[j][2]);
      CHECK(entry(k, i, j) == doctest::Approx(expected).epsilon(1e-13));
    }
}

TEST_CASE("mass matrix integrates constants exactly") {
  const Mesh mesh = generate_ellipsoid_mesh(1.0, 1.0, 1.0, 3);
  const SparseOperator m = assemble_mass(mesh);
  CHECK(m.is_symmetric(1e-12));
  const std::vector<double> ones(static_cast<std::size_t>(mesh.vertex_count()), 1.0);
  CHECK(m.inner(ones, ones) == doctest::Approx(mesh_volume(mesh)).epsilon(1e-12));
  CHECK(l2_inner(m, ones, ones) == doctest::Approx(mesh_volume(mesh)).epsilon(1e-12));
}

TEST_CASE("constant source load distributes vol * f / 4 per tet vertex") {
  const Mesh mesh = generate_ellipsoid_mesh(1.0, 0.5, 1.0, 2);
  const double f = 2.5;
  const NodalField load = constant_source_load(mesh, f);
  CHECK(std::accumulate(load.begin(), load.end(), 0.0) ==
        doctest::Approx(f * mesh_volume(mesh)).epsilon(1e-12));

  const Mesh tet = test_helpers::unit_tet_mesh();
  const NodalField tet_load = constant_source_load(tet, 12.0);
  for (double v : tet_load) CHECK(v == doctest::Approx(12.0 / 6.0 / 4.0).epsilon(1e-14));
}

TEST_CASE("source_load equals mass times the nodal source") {
  const Mesh mesh = generate_ellipsoid_mesh(1.0, 1.0, 1.0, 2);
  const SparseOperator m = assemble_mass(mesh);
  const NodalField f = interpolate(mesh, [](const Vec3& p) { return p.x - 2.0 * p.z; });
  const NodalField load = source_load(m, f);
  const NodalField direct = m.multiply(f);
  for (std::size_t i = 0; i < load.size(); ++i) CHECK(load[i] == direct[i]);
}

TEST_CASE("trace and interpolation helpers fill the expected vertices") {
  const Mesh mesh = generate_ellipsoid_mesh(1.0, 1.0, 1.0, 3);
  const auto fn = [](const Vec3& p) { return 1.0 + p.x * p.y; };
  const NodalField trace = boundary_trace(mesh, fn);
  const NodalField full = interpolate(mesh, fn);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const double expected = fn(mesh.vertices[static_cast<std::size_t>(v)]);
    CHECK(full[static_cast<std::size_t>(v)] == expected);
    if (mesh.boundary_vertex_flags[static_cast<std::size_t>(v)])
      CHECK(trace[static_cast<std::size_t>(v)] == expected);
    else
      CHECK(trace[static_cast<std::size_t>(v)] == 0.0);
  }
}

TEST_CASE("piecewise control projects to area-weighted vertex averages") {
  const Mesh mesh = test_helpers::octahedron_mesh();

  SUBCASE("uniform label") {
    BoundaryPartition partition{2, std::vector<int>(8, 1)};
    const std::vector<double> alpha = {7.0, -1.0};
    const NodalField g = project_boundary_control(mesh, partition, alpha);
    CHECK(g[0] == 0.0);  // interior vertex
    for (int v = 1; v < 7; ++v) CHECK(g[static_cast<std::size_t>(v)] == doctest::Approx(7.0));
  }

  SUBCASE("mixed labels on equal-area faces average the control") {
    // top faces (those touching the +z vertex) labeled 2, bottom labeled 1
    BoundaryPartition partition{2, std::vector<int>(8, 1)};
    int top_vertex = -1;
    for (int v = 0; v < 7; ++v)
      if (mesh.vertices[static_cast<std::size_t>(v)].z == 1.0) top_vertex = v;
    REQUIRE(top_vertex >= 0);
    for (int f = 0; f < 8; ++f) {
      const auto& face = mesh.boundary_faces[static_cast<std::size_t>(f)];
      if (std::count(face.begin(), face.end(), top_vertex) > 0)
        partition.labels[static_cast<std::size_t>(f)] = 2;
    }
    const std::vector<double> alpha = {0.0, 10.0};
    const NodalField g = project_boundary_control(mesh, partition, alpha);
    for (int v = 1; v < 7; ++v) {
      const Vec3& p = mesh.vertices[static_cast<std::size_t>(v)];
      // all eight faces have the same area, and every equatorial vertex
      // touches two top and two bottom faces
      const double expected = p.z == 1.0 ? 10.0 : p.z == -1.0 ? 0.0 : 5.0;
      CHECK(g[static_cast<std::size_t>(v)] == doctest::Approx(expected).epsilon(1e-14));
    }
  }

  SUBCASE("rejects inconsistent input") {
    BoundaryPartition partition{2, std::vector<int>(7, 1)};
    CHECK_THROWS_AS(project_boundary_control(mesh, partition, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
    BoundaryPartition bad_label{2, std::vector<int>(8, 1)};
    bad_label.labels[3] = 5;
    CHECK_THROWS_AS(project_boundary_control(mesh, bad_label, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("Dirichlet solve reproduces linear fields to rounding") {
  const Mesh mesh = generate_ellipsoid_mesh(1.0, 1.0, 1.0, 4);
  const SparseOperator k = assemble_stiffness(mesh);
  const auto fn = [](const Vec3& p) { return 2.0 * p.x - 3.0 * p.y + p.z; };
  const NodalField g = boundary_trace(mesh, fn);
  const NodalField u = solve_dirichlet(mesh, k, g, 0.0, {1e-12});
  const NodalField exact = interpolate(mesh, fn);
  double err = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(u[i] - exact[i]));
  CHECK(err <= 1e-8);

  // boundary data is carried verbatim
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (mesh.boundary_vertex_flags[static_cast<std::size_t>(v)])
      CHECK(u[static_cast<std::size_t>(v)] == g[static_cast<std::size_t>(v)]);
}

TEST_CASE("manufactured quadratic converges at second order in L2") {
  const auto l2_error = [](int n) {
    const Mesh mesh = generate_ellipsoid_mesh(1.0, 1.0, 1.0, n);
    const SparseOperator k = assemble_stiffness(mesh);
    const SparseOperator m = assemble_mass(mesh);
    const auto fn = [](const Vec3& p) { return p.x * p.x + p.y * p.y + p.z * p.z; };
    const NodalField g = boundary_trace(mesh, fn);
    const NodalField u = solve_dirichlet(mesh, k, g, -6.0, {1e-12});
    NodalField e = interpolate(mesh, fn);
    for (std::size_t i = 0; i < u.size(); ++i) e[i] = u[i] - e[i];
    return std::sqrt(l2_inner(m, e, e));
  };
  const double coarse = l2_error(4);
  const double fine = l2_error(8);
  CHECK(coarse / fine >= 2.5);
}

TEST_CASE("solver validates its boundary data") {
  const Mesh mesh = test_helpers::octahedron_mesh();
  const SparseOperator k = assemble_stiffness(mesh);
  const DirichletSolver solver(mesh, k, {1e-12});
  CHECK(solver.interior_count() == 1);

  NodalField bad(7, 0.0);
  bad[0] = 1.0;  // vertex 0 is interior
  CHECK_THROWS_AS(solver.solve(bad, NodalField(7, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(solver.solve(NodalField(5, 0.0), NodalField(7, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("octahedron solve has the closed-form single-unknown solution") {
  // One interior vertex: K_cc u_c = f_c - sum_j K_cj g_j with K_cc = 4 and
  // K_cj = -2/3 for each of the six boundary vertices.
  const Mesh mesh = test_helpers::octahedron_mesh();
  const SparseOperator k = assemble_stiffness(mesh);
  CHECK(entry(k, 0, 0) == doctest::Approx(4.0).epsilon(1e-13));
  for (int j = 1; j < 7; ++j)
    CHECK(entry(k, 0, j) == doctest::Approx(-2.0 / 3.0).epsilon(1e-13));

  NodalField g(7, 0.0);
  for (int j = 1; j < 7; ++j) g[static_cast<std::size_t>(j)] = 3.0;
  const double f = 1.0;
  const NodalField u = solve_dirichlet(mesh, k, g, f, {1e-13});
  // load on the center vertex: f * sum of vol/4 over its 8 tets = f/3
  const double expected = (f / 3.0 + (2.0 / 3.0) * 6.0 * 3.0) / 4.0;
  CHECK(u[0] == doctest::Approx(expected).epsilon(1e-12));
}
