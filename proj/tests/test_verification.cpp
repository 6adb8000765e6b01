// Grids, grid moments, contour matrices and the four-case table. The
// total-variation pins are cross-checked against the brute-force oracle.

#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "gdcount/gdcount.hpp"
#include "support/bvn_grid_oracle.hpp"

using namespace gdcount;

TEST_CASE("default grids", "[verification]") {
  const auto& cases = table1_cases();
  const auto ga = default_grid(case_params(cases[0]));
  CHECK(ga[0].lo == 10);
  CHECK(ga[0].hi == 90);
  CHECK(ga[1].lo == 10);
  CHECK(ga[1].hi == 90);
  const auto gc = default_grid(case_params(cases[2]));
  CHECK(gc[0].lo == 0);
  CHECK(gc[0].hi == 50);
  const auto gd = default_grid(case_params(cases[3]));
  CHECK(gd[0].lo == 0);
  CHECK(gd[0].hi == 20);
  CHECK(*case_params(cases[3]).marginal(0).support_max() == 20);

  const auto g4 = default_grid(case_params(cases[0]), 4.0);
  CHECK(g4[0].lo == 30);
  CHECK(g4[0].hi == 70);
  CHECK_THROWS_AS(default_grid(case_params(cases[0]), 3.9), DomainError);
  CHECK_THROWS_AS(GridSpec({{5, 4}}), DomainError);
  CHECK_THROWS_AS(GridSpec({{-1, 4}}), DomainError);
  CHECK(GridSpec({{0, 2}, {3, 5}, {1, 1}}).point_count() == 9);
}

TEST_CASE("grid moments", "[verification]") {
  SECTION("point mass") {
    const GridSpec g({{0, 12}, {3, 9}});
    const auto m = moments_from_pmf([](std::span<const std::int64_t> x) { return x[0] == 7 && x[1] == 4 ? 0.25 : 0.0; }, g);
    CHECK(m.means[0] == 7.0);
    CHECK(m.means[1] == 4.0);
    CHECK(m.variances[0] == 0.0);
    CHECK(m.variances[1] == 0.0);
    CHECK(m.total_mass == 0.25);
    const auto u = moments_from_pmf([](std::span<const std::int64_t> x) { return x[0] == 7 && x[1] == 4 ? 0.25 : 0.0; }, g, true);
    CHECK(*u.normalization == 4.0);
    CHECK(u.total_mass == 1.0);
  }
  SECTION("independent product") {
    const auto g1 = from_moments(50, 25);
    const GridSpec g({default_range(g1), default_range(g1)});
    const auto m = moments_from_pmf([&](std::span<const std::int64_t> x) { return g1.pmf(x[0]) * g1.pmf(x[1]); }, g);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(std::fabs(m.means[i] - 50.0) <= 1e-6);
      CHECK(std::fabs(m.variances[i] - 25.0) <= 1e-6);
    }
    CHECK(std::fabs(m.corr(0, 1)) <= 1e-6);
    CHECK(m.total_mass <= 1.0 + 1e-9);
    CHECK(m.total_mass > 1.0 - 1e-12);
  }
  SECTION("errors") {
    const GridSpec g({{0, 3}});
    CHECK_THROWS_AS(moments_from_pmf([](std::span<const std::int64_t>) { return 0.0; }, g), ZeroMass);
    CHECK_THROWS_AS(moments_from_pmf([](std::span<const std::int64_t>) { return -1.0; }, g), DomainError);
    CHECK_THROWS_AS(moments_from_values(DenseGrid{g, {1.0, 2.0}}), DimensionError);
  }
}

TEST_CASE("reference values match the published table", "[verification]") {
  const auto& c = table1_cases();
  REQUIRE(c.size() == 4);
  CHECK(c[0].reference.rho_prime == 0.5144);
  CHECK(c[0].reference.k == 0.99);
  CHECK(c[0].reference.rhos == 0.5009);
  CHECK(c[1].reference.rho_prime == 0.7129);
  CHECK(c[1].reference.k == 0.99);
  CHECK(c[1].reference.rhos == 0.7013);
  CHECK(c[2].reference.mu1s == 9.45);
  CHECK(c[2].reference.v1s == 23.30);
  CHECK(c[2].reference.rhos == 0.3876);
  CHECK(c[3].reference.mu2s == 5.43);
  CHECK(c[3].reference.v2s == 10.43);
  CHECK(c[3].reference.k == 0.97);
  CHECK(c[1].mu2 == 60.0);
  CHECK(c[2].v2 == 4.0);
  CHECK(c[3].rho == 0.7);
}

TEST_CASE("table reproduction", "[verification]") {
  const auto rows = reproduce_table1();
  REQUIRE(rows.size() == 4);

  // Computed columns, pinned as regression values.
  const std::array<std::array<double, 7>, 4> pins{{
      {0.4983317328, 0.9949853497, 50.2512947694, 25.0221240895, 50.2512947694, 25.0221240895, 0.5013066252},
      {0.6976431838, 0.9929666050, 50.3529582620, 25.0716652472, 60.3522756756, 25.0042266526, 0.7016390919},
      {0.3867830875, 0.9894134178, 10.5197063585, 27.0219001762, 11.0842516471, 3.9502321522, 0.3967236388},
      {0.6731792971, 0.9740902216, 10.2519246376, 4.7532754121, 5.4832378838, 11.1446837161, 0.6713515954},
  }};
  const std::array<double, 4> tv_pins{0.0231508516, 0.0305911267, 0.0406477332, 0.0606875894};

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto& v = r.computed;
    INFO("case " << r.input.label);
    const std::array<double, 7> got{v.rho_prime, v.k, v.mu1s, v.v1s, v.mu2s, v.v2s, v.rhos};
    for (std::size_t j = 0; j < 7; ++j) CHECK(got[j] == Catch::Approx(pins[i][j]).margin(1e-9));
    CHECK(r.tv_distance == Catch::Approx(tv_pins[i]).margin(1e-9));
    CHECK(r.exact_mass >= 1.0 - 1e-5);
    CHECK(r.exact_mass <= 1.0 + 1e-9);
    CHECK(r.deviation.rho_prime == v.rho_prime - r.input.reference.rho_prime);
    CHECK(r.deviation.v2s == v.v2s - r.input.reference.v2s);

    // Correlation and K against the published columns.
    CHECK(std::fabs(v.rho_prime - r.input.reference.rho_prime) <= 0.02);
    CHECK(std::fabs(v.k - r.input.reference.k) <= 0.02);
  }
  CHECK(rows[0].argmax_match);
  CHECK(rows[1].argmax_match);
}

TEST_CASE("total variation against the brute-force oracle", "[verification]") {
  for (const auto& c : table1_cases()) {
    const auto p = case_params(c);
    const auto g = default_grid(p);
    const auto ref = oracle::grids(p, g);
    const auto exact = contour_grid(p, g, PmfKind::kExact);
    const auto approx = contour_grid(p, g, PmfKind::kApprox);
    const double tv = oracle::total_variation(ref);
    double worst_exact = 0.0, worst_approx = 0.0;
    for (std::size_t k = 0; k < ref.exact.size(); ++k) {
      worst_exact = std::max(worst_exact, std::fabs(ref.exact[k] - exact.matrix.values[k]));
      worst_approx = std::max(worst_approx, std::fabs(ref.approx[k] - approx.matrix.values[k]));
    }
    INFO("case " << c.label << ": oracle tv " << tv);
    CHECK(worst_exact <= 1e-10);
    CHECK(worst_approx <= 1e-12);
    CHECK(std::fabs(total_variation(exact.matrix, approx.matrix) - tv) <= 1e-8);
  }
}

TEST_CASE("contour matrices", "[verification]") {
  const auto p = case_params(table1_cases()[0]);
  const auto g = default_grid(p);
  const auto exact = contour_grid(p, g, PmfKind::kExact);
  CHECK(std::fabs(exact.matrix.sum() - 1.0) <= 1e-6);
  CHECK(exact.matrix.values.size() == 81u * 81u);
  CHECK(exact.normalization == 1.0);
  CHECK(exact.most_negative >= -1e-13);
  const auto approx = contour_grid(p, g, PmfKind::kApprox);
  CHECK(std::fabs(approx.matrix.sum() - 1.0) <= 1e-12);
  CHECK(approx.normalization == Catch::Approx(normalization_constant(p, g)).epsilon(1e-14));

  SECTION("independent approximate matrix is the outer product") {
    const std::array<double, 2> mu{10, 11}, v{25, 4};
    const auto q = new_gdn(mu, v, CorrelationMatrix::bivariate(0.0));
    const auto gq = default_grid(q);
    const auto m = contour_grid(q, gq, PmfKind::kApprox);
    double mass = 0.0;
    for (auto x1 = gq[0].lo; x1 <= gq[0].hi; ++x1)
      for (auto x2 = gq[1].lo; x2 <= gq[1].hi; ++x2) mass += q.marginal(0).pmf(x1) * q.marginal(1).pmf(x2);
    std::size_t k = 0;
    for (auto x1 = gq[0].lo; x1 <= gq[0].hi; ++x1) {
      for (auto x2 = gq[1].lo; x2 <= gq[1].hi; ++x2) {
        const double outer = q.marginal(0).pmf(x1) * q.marginal(1).pmf(x2);
        CHECK(std::fabs(m.matrix.values[k++] - outer / mass) <= 1e-15);
      }
    }
  }
  SECTION("diagnostics and validation") {
    CHECK(!ContourData{DenseGrid{GridSpec({{0, 999}}), std::vector<double>(1000)}, PmfKind::kExact, 1.0, 1, 0.0}.clamp_warning());
    CHECK(ContourData{DenseGrid{GridSpec({{0, 999}}), std::vector<double>(1000)}, PmfKind::kExact, 1.0, 2, 0.0}.clamp_warning());
    const std::array<double, 3> mu{1, 2, 3}, v{1, 2, 3};
    const auto t = new_gdn(mu, v, CorrelationMatrix::identity(3));
    CHECK_THROWS_AS(contour_grid(t, default_grid(t), PmfKind::kExact), DimensionError);
    CHECK_THROWS_AS(contour_grid(p, GridSpec({{0, 101}, {0, 5}}), PmfKind::kExact), DomainError);
    CHECK_THROWS_AS(total_variation(exact.matrix, DenseGrid{GridSpec({{0, 1}}), {0.5, 0.5}}), DimensionError);
  }
}
