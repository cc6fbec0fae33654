#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mixfht/common.hpp"
#include "mixfht/fht.hpp"
#include "mixfht/rng.hpp"
#include "mixfht/simulate.hpp"
#include "support/oracles.hpp"

using namespace mixfht;
namespace sim = mixfht::simulate;

TEST_CASE("raw covariates match the gamma marginals and couple correctly") {
  sim::CovariateDesign c;  // gamma(2, rate .2) and gamma(25, rate .8)
  Rng rng(101);
  auto x = sim::gen_covariates_raw(c, 20000, rng);
  std::vector<double> a(x.size()), b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    a[i] = x[i][0];
    b[i] = x[i][1];
  }
  CHECK(oracles::mean(a) == doctest::Approx(10.0).epsilon(0.03));
  CHECK(oracles::variance(a) == doctest::Approx(50.0).epsilon(0.08));
  CHECK(oracles::mean(b) == doctest::Approx(31.25).epsilon(0.02));
  CHECK(oracles::variance(b) == doctest::Approx(39.0625).epsilon(0.08));
  // normal copula at 0.3 puts the rank correlation near (6/pi) asin(0.15)
  double rho = oracles::spearman(a, b);
  CHECK(rho > 0.20);
  CHECK(rho < 0.37);
}

TEST_CASE("copula correlation limits behave") {
  sim::CovariateDesign indep;
  indep.corr = 0.0;
  Rng r1(102);
  auto x = sim::gen_covariates_raw(indep, 8000, r1);
  std::vector<double> a(x.size()), b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    a[i] = x[i][0];
    b[i] = x[i][1];
  }
  CHECK(std::fabs(oracles::spearman(a, b)) < 0.05);

  sim::CovariateDesign tight;
  tight.corr = 0.99;
  Rng r2(103);
  auto y = sim::gen_covariates_raw(tight, 4000, r2);
  for (std::size_t i = 0; i < y.size(); ++i) {
    a[i] = y[i][0];
    b[i] = y[i][1];
  }
  a.resize(y.size());
  b.resize(y.size());
  CHECK(oracles::spearman(a, b) > 0.9);
}

TEST_CASE("column standardization centres and scales") {
  std::vector<std::array<double, 2>> x;
  Rng rng(104);
  for (int i = 0; i < 500; ++i)
    x.push_back({3.0 + 2.0 * rng.normal(), -1.0 + 0.1 * rng.normal()});
  sim::standardize_columns(x);
  for (int j = 0; j < 2; ++j) {
    std::vector<double> col(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) col[i] = x[i][j];
    CHECK(std::fabs(oracles::mean(col)) < 1e-12);
    CHECK(oracles::variance(col) == doctest::Approx(1.0).epsilon(1e-12));
  }

  // constant column: centred, not divided
  std::vector<std::array<double, 2>> flat = {{5.0, 1.0}, {5.0, 2.0}, {5.0, 3.0}};
  sim::standardize_columns(flat);
  for (const auto& row : flat) CHECK(row[0] == 0.0);
}

TEST_CASE("reference designs are valid and encode the variant constraints") {
  using model::Variant;
  for (Variant v : {Variant::cs_c_fv, Variant::cs_i_fv, Variant::cs_i,
                    Variant::cs_n}) {
    auto d = sim::default_design(v, 100, 9);
    CHECK_NOTHROW(sim::validate_design(d));
  }
  auto ci = sim::default_design(Variant::cs_i, 100, 9);
  CHECK(ci.truth.beta[0][1] == ci.truth.beta[1][1]);
  CHECK(ci.truth.theta1[0] == ci.truth.theta1[1]);
  auto cn = sim::default_design(Variant::cs_n, 100, 9);
  CHECK(cn.truth.rho == std::vector<double>{1.0});
  CHECK(cn.truth.beta.size() == 1);
}

TEST_CASE("design validation rejects bad settings") {
  auto ok = sim::default_design(model::Variant::cs_c_fv, 50, 1);
  auto expect_bad = [&](auto&& tweak) {
    auto d = ok;
    tweak(d);
    CHECK_THROWS_AS(sim::validate_design(d), ConfigError);
  };
  expect_bad([](sim::SimDesign& d) { d.n_subjects = 0; });
  expect_bad([](sim::SimDesign& d) { d.covariates.shape1 = 0.0; });
  expect_bad([](sim::SimDesign& d) { d.covariates.corr = 1.0; });
  expect_bad([](sim::SimDesign& d) { d.followup = -5.0; });
  expect_bad([](sim::SimDesign& d) { d.followup_pool = {168.0, -1.0}; });
  expect_bad([](sim::SimDesign& d) { d.nu = d.x0; });
  expect_bad([](sim::SimDesign& d) { d.truth.beta.pop_back(); });
  expect_bad([](sim::SimDesign& d) { d.truth.rho = {0.7, 0.7}; });
  expect_bad([](sim::SimDesign& d) { d.truth.rho = {-0.2, 1.2}; });
  expect_bad([](sim::SimDesign& d) { d.truth.theta1[1] = 0.0; });
  expect_bad([](sim::SimDesign& d) { d.truth.theta2 = -1.0; });
}

TEST_CASE("subject histories end with the censored residual") {
  auto d = sim::default_design(model::Variant::cs_c_fv, 10, 31);
  d.followup = 168.0;
  Rng rng(555);
  auto s = sim::gen_subject(d, {1.0, 0.2, -0.4}, "p1", rng);
  REQUIRE(!s.rec.t.empty());
  double total = 0.0;
  for (std::size_t j = 0; j < s.rec.t.size(); ++j) {
    total += s.rec.t[j];
    bool last = (j + 1 == s.rec.t.size());
    CHECK(s.rec.event[j] == (last ? 0 : 1));
    CHECK(s.rec.t[j] >= 0.0);
  }
  CHECK(total == 168.0);  // residual closes the window exactly
  CHECK((s.truth.m == 0 || s.truth.m == 1));

  // intercept must lead the covariate row
  Rng r2(556);
  CHECK_THROWS_AS(sim::gen_subject(d, {0.2, -0.4, 1.0}, "p2", r2), ShapeError);
  CHECK_THROWS_AS(sim::gen_subject(d, {1.0, 0.2}, "p3", r2), ShapeError);
}

TEST_CASE("day rounding yields integer gaps") {
  auto d = sim::default_design(model::Variant::cs_c_fv, 10, 32);
  d.round_days = true;
  d.followup = 168.0;
  Rng rng(557);
  auto s = sim::gen_subject(d, {1.0, 0.0, 0.0}, "p1", rng);
  for (double t : s.rec.t) {
    CHECK(t == std::round(t));
    CHECK(t >= 0.0);
  }
}

TEST_CASE("zero follow-up gives a single censored record") {
  auto d = sim::default_design(model::Variant::cs_c_fv, 5, 33);
  d.followup = 0.0;
  auto res = sim::gen_dataset(d);
  REQUIRE(res.data.size() == 5);
  for (const auto& r : res.data) {
    REQUIRE(r.t.size() == 1);
    CHECK(r.t[0] == 0.0);
    CHECK(r.event[0] == 0);
  }
}

TEST_CASE("degenerate weights pin every subject to one component") {
  auto d = sim::default_design(model::Variant::cs_c_fv, 200, 34);
  d.truth.rho = {1.0, 0.0};
  d.followup = 0.0;  // latents only; no event simulation needed
  auto res = sim::gen_dataset(d);
  for (const auto& t : res.truth) CHECK(t.m == 0);
}

TEST_CASE("latent draws follow the design across a large cohort") {
  auto d = sim::default_design(model::Variant::cs_c_fv, 10000, 35);
  d.followup = 0.0;  // one record per subject keeps this cheap
  auto res = sim::gen_dataset(d);
  std::vector<double> z1a, z1b, z2;
  int n0 = 0;
  for (const auto& t : res.truth) {
    (t.m == 0 ? z1a : z1b).push_back(t.z1_active);
    z2.push_back(t.z2);
    n0 += (t.m == 0);
  }
  CHECK(double(n0) / 10000.0 == doctest::Approx(0.4).epsilon(0.05));
  CHECK(oracles::variance(z1a) == doctest::Approx(0.5).epsilon(0.08));
  CHECK(oracles::variance(z1b) == doctest::Approx(0.1).epsilon(0.08));
  CHECK(oracles::variance(z2) == doctest::Approx(0.3).epsilon(0.08));
  CHECK(std::fabs(oracles::mean(z2)) < 0.02);

  // follow-up pool draws use the provided values only
  auto dp = sim::default_design(model::Variant::cs_c_fv, 400, 36);
  dp.followup_pool = {0.0, 0.0, 0.0};  // pool overrides the scalar
  dp.followup = 999.0;
  auto rp = sim::gen_dataset(dp);
  for (const auto& r : rp.data) {
    REQUIRE(r.t.size() == 1);
    CHECK(r.t[0] == 0.0);
  }
}

TEST_CASE("generated first gaps follow the hitting-time distribution") {
  // Single component, vanishing frailties: first gaps are iid FHT draws.
  auto d = sim::default_design(model::Variant::cs_n, 2000, 37);
  d.truth.alpha = {2.0};
  d.truth.beta = {{0.5}};
  d.truth.theta1 = {1e-8};
  d.truth.theta2 = 1e-8;
  d.followup = 2500.0;  // ~50 mean gaps: first-gap censoring is negligible
  auto res = sim::gen_dataset(d);
  std::vector<double> first;
  for (const auto& r : res.data)
    if (!r.event.empty() && r.event[0] == 1) first.push_back(r.t[0]);
  REQUIRE(first.size() >= 1990);

  fht::FhtParams fp{d.x0, d.nu, d.x0 + std::exp(2.0), std::exp(0.5)};
  double ks = oracles::ks_statistic(
      first, [&](double t) { return fht::cdf(t, fp); });
  CHECK(ks < 1.62762 / std::sqrt(double(first.size())));  // 1% level

  // cohort texture at the reference design: event counts match the model
  auto dd = sim::default_design(model::Variant::cs_c_fv, 400, 38);
  dd.followup = 400.0;
  auto rr = sim::gen_dataset(dd);
  double events = 0.0;
  int silent = 0;
  for (const auto& r : rr.data) {
    int e = 0;
    for (int v : r.event) e += v;
    events += e;
    silent += (e == 0);
  }
  CHECK(events / 400.0 > 10.0);
  CHECK(events / 400.0 < 30.0);
  CHECK(double(silent) / 400.0 < 0.25);
}

TEST_CASE("same seed reproduces the cohort bit for bit") {
  auto d = sim::default_design(model::Variant::cs_c_fv, 50, 39);
  d.followup = 168.0;
  auto a = sim::gen_dataset(d);
  auto b = sim::gen_dataset(d);
  REQUIRE(a.data.size() == b.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    CHECK(a.data[i].id == b.data[i].id);
    CHECK(a.data[i].x == b.data[i].x);
    CHECK(a.data[i].t == b.data[i].t);
    CHECK(a.data[i].event == b.data[i].event);
    CHECK(a.truth[i].m == b.truth[i].m);
    CHECK(a.truth[i].z1_active == b.truth[i].z1_active);
    CHECK(a.truth[i].z2 == b.truth[i].z2);
  }

  auto d2 = d;
  d2.seed = 40;
  auto c = sim::gen_dataset(d2);
  bool any_diff = false;
  for (std::size_t i = 0; i < c.data.size() && !any_diff; ++i)
    any_diff = (c.data[i].t != a.data[i].t);
  CHECK(any_diff);
}

TEST_CASE("runaway subjects hit the record cap") {
  auto d = sim::default_design(model::Variant::cs_n, 1, 41);
  d.truth.alpha = {0.0};
  d.truth.beta = {{5.0}};  // enormous volatility: microscopic gaps
  d.truth.theta1 = {1e-8};
  d.truth.theta2 = 1e-8;
  d.followup = 1e9;
  CHECK_THROWS_AS(sim::gen_dataset(d), NumericError);
}
