#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "setcover/error.hpp"
#include "setcover/theory/gaussian_certificate.hpp"
#include "setcover/theory/linear_bound.hpp"
#include "setcover/theory/normal.hpp"
#include "setcover/theory/shatter.hpp"
#include "setcover/theory/uniform_convergence.hpp"

using namespace setcover;
using namespace setcover::theory;

TEST_CASE("normal helpers") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  for (double p : {1e-6, 0.1, 0.5, 0.9}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), ConfigError);
  CHECK_THROWS_AS(normal_quantile(1.0), ConfigError);
}

TEST_CASE("rectangle shatter small cases") {
  const auto one = build_rectangle_shatter(1, 0.1);
  const auto v1 = verify_shatter(one);
  REQUIRE(v1.size() == 2);
  CHECK(v1[0].subset == 0);
  CHECK(v1[1].coefficients[0] == Rational(1));
  CHECK(v1[1].masses[0] == doctest::Approx(0.9).epsilon(1e-12));

  const auto two = build_rectangle_shatter(2, 0.1);
  const auto v2 = verify_shatter(two);
  REQUIRE(v2.size() == 4);
  const double nonmember = (2.0 / 3.0) * 0.01 * 0.9 + 0.99 * 0.9;
  for (const auto& v : v2) {
    CHECK(v.verified);
    for (int i = 0; i < 2; ++i) {
      const bool in = ((v.subset >> i) & 1u) != 0;
      const auto k = static_cast<std::size_t>(i);
      CHECK(v.masses[k] == doctest::Approx(in ? 0.9 : nonmember).epsilon(1e-12));
    }
  }
  for (const auto& d : two.domains) CHECK(d.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rectangle shatter verifies every assignment") {
  for (double gamma : {0.1, 0.3, 0.001}) {
    for (int n = 1; n <= 4; ++n) {
      const auto s = build_rectangle_shatter(n, gamma);
      const auto verdicts = verify_shatter(s);
      CHECK(verdicts.size() == (std::size_t{1} << n));
      const std::int64_t half = std::int64_t{1} << (n - 1);
      const Rational expected_non = (Rational(1) - s.small_share) +
                                    s.small_share * Rational(half, half + 1);
      CHECK(nonmember_coefficient(n, s.small_share) == expected_non);
      for (const auto& v : verdicts) {
        CHECK(v.verified);
        for (int i = 0; i < n; ++i) {
          const bool in = ((v.subset >> i) & 1u) != 0;
          CHECK(v.coefficients[static_cast<std::size_t>(i)] == (in ? Rational(1) : expected_non));
        }
      }
      for (const auto& d : s.domains) {
        CHECK(d.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(d.filler_density >= 0.0);
      }
    }
  }
}

TEST_CASE("perturbing the middle piece breaks the shatter") {
  auto s = build_rectangle_shatter(3, 0.1);
  perturb_piece(s, 0, s.middle_piece, Rational(11, 10));
  bool any_failed = false;
  for (const auto& v : verify_shatter(s)) any_failed = any_failed || !v.verified;
  CHECK(any_failed);

  auto t = build_rectangle_shatter(3, 0.1);
  perturb_piece(t, 0, 0, Rational(9, 10));
  bool member_failed = false;
  for (const auto& v : verify_shatter(t)) member_failed = member_failed || !v.verified;
  CHECK(member_failed);
}

TEST_CASE("rectangle shatter rejects invalid inputs") {
  CHECK_THROWS_AS(build_rectangle_shatter(0, 0.1), ConfigError);
  CHECK_THROWS_AS(build_rectangle_shatter(kMaxShatterDomains + 1, 0.1), ConfigError);
  CHECK_THROWS_AS(build_rectangle_shatter(2, 0.0), ConfigError);
  CHECK_THROWS_AS(build_rectangle_shatter(2, 1.0), ConfigError);
}

TEST_CASE("shatter csv") {
  const auto s = build_rectangle_shatter(2, 0.1);
  std::ostringstream out;
  write_shatter_csv(out, s, verify_shatter(s));
  const auto text = out.str();
  CHECK(text.rfind("j,subset,domain,member,mass,coefficient,verified\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 4 * 2);
}

TEST_CASE("linear bound on one-dimensional Gaussian domains") {
  Rng rng = make_rng(51, 0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<OneDimDomain> domains;
    for (int e = 0; e < 5; ++e) domains.push_back(random_gaussian_1d_domain(2, rng));
    const auto r = check_1d_linear_bound(domains, 0.1, 2000);
    REQUIRE(r.has_value());
    CHECK_FALSE(r->achiever_found);
    CHECK(r->thresholds_checked == 2 * 2 * 2000);
    CHECK(r->witness >= 0);
    CHECK_FALSE(r->must_succeed[static_cast<std::size_t>(r->witness)]);
    for (int y = 0; y < 2; ++y) {
      CHECK(r->must_succeed[static_cast<std::size_t>(r->i_max[static_cast<std::size_t>(y)])]);
      CHECK(r->must_succeed[static_cast<std::size_t>(r->i_min[static_cast<std::size_t>(y)])]);
    }
  }
  std::vector<OneDimDomain> few{gaussian_1d_domain({0.0, 1.0}, {1.0, 1.0}),
                                gaussian_1d_domain({0.5, 1.5}, {1.0, 1.0})};
  CHECK_FALSE(check_1d_linear_bound(few, 0.1).has_value());
}

TEST_CASE("gaussian certificate on a hand-chosen instance") {
  // nu = (mu, sqrt(sigma)) in R^3; the fourth vector is the sum of the first two
  // minus the third, so the dependence is exact.
  std::vector<GaussianDomain> d(4);
  d[0].mu = Eigen::Vector2d(1.0, 0.0);
  d[0].sigma = 1.0;
  d[1].mu = Eigen::Vector2d(0.0, 1.0);
  d[1].sigma = 4.0;
  d[2].mu = Eigen::Vector2d(-1.0, 2.0);
  d[2].sigma = 1.0;
  d[3].mu = Eigen::Vector2d(1.0, -1.0);
  d[3].sigma = 4.0;
  const Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
  const auto c = gaussian_nonshatter_certificate(d, cov, 0.1, 20000, 3);
  CHECK(c.dim == 2);
  CHECK(c.residual <= 1e-9);
  CHECK(c.alpha[static_cast<std::size_t>(c.pivot)] == 0.0);
  CHECK(c.realized == 0);
  CHECK(c.samples == 20000);

  // The dependence itself is checked independently: nu_k = sum alpha_i nu_i.
  Eigen::Vector3d lhs;
  lhs << d[static_cast<std::size_t>(c.pivot)].mu,
      std::sqrt(d[static_cast<std::size_t>(c.pivot)].sigma);
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < 4; ++i) {
    Eigen::Vector3d nu;
    nu << d[i].mu, std::sqrt(d[i].sigma);
    rhs += c.alpha[i] * nu;
  }
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);

  auto scaled = d;
  for (auto& g : scaled) {
    g.mu *= 2.0;
    g.sigma *= 4.0;
  }
  const auto c2 = gaussian_nonshatter_certificate(scaled, cov, 0.1, 1000, 3);
  CHECK(c2.pivot == c.pivot);
  for (std::size_t i = 0; i < 4; ++i) CHECK(c2.alpha[i] == doctest::Approx(c.alpha[i]));
  CHECK(c2.assignment == c.assignment);

  d.pop_back();
  CHECK_THROWS_AS(gaussian_nonshatter_certificate(d, cov, 0.1, 10, 3), ConfigError);
}

TEST_CASE("gaussian certificate on random instances") {
  Rng rng = make_rng(52, 0);
  for (std::size_t dim : {2u, 3u, 5u}) {
    const auto inst = random_gaussian_instance(dim, rng);
    CHECK(inst.domains.size() == dim + 2);
    const auto c = gaussian_nonshatter_certificate(inst.domains, inst.sigma_shared, 0.1, 5000, dim);
    CHECK(c.residual <= 1e-9);
    CHECK(c.realized == 0);
    const auto j = certificate_to_json(c);
    CHECK(j.contains("alpha"));
  }
  // Realized assignments agree with Monte Carlo away from the boundary.
  std::normal_distribution<double> n(0.0, 1.0);
  std::size_t decided = 0;
  for (int t = 0; t < 20; ++t) {
    const auto inst = random_gaussian_instance(2, rng);
    Eigen::VectorXd theta(2);
    theta << n(rng), n(rng);
    const auto got = realized_assignment(inst.domains, inst.sigma_shared, theta, 0.1);
    const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(inst.sigma_shared).matrixL();
    for (std::size_t i = 0; i < inst.domains.size(); ++i) {
      const auto& g = inst.domains[i];
      std::size_t hit = 0;
      const std::size_t draws = 20000;
      for (std::size_t k = 0; k < draws; ++k) {
        Eigen::VectorXd z(2);
        z << n(rng), n(rng);
        const Eigen::VectorXd x = g.mu + std::sqrt(g.sigma) * (chol * z);
        hit += theta.dot(x) >= 0.0 ? 1 : 0;
      }
      const double p = static_cast<double>(hit) / static_cast<double>(draws);
      if (std::abs(p - 0.9) > 0.02) {
        CHECK(got[i] == (p >= 0.9));
        ++decided;
      }
    }
  }
  CHECK(decided > 40);
}

TEST_CASE("uniform convergence curve") {
  UcConfig cfg;
  cfg.m_values = {5, 40};
  cfg.trials = 6;
  cfg.fresh_domains = 100;
  cfg.trainer.epochs = 10;
  const auto curve = empirical_uniform_convergence(cfg);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].m == 5);
  CHECK(curve[1].trials + curve[1].infeasible == 6);
  CHECK(curve[1].mean_violation <= curve[0].mean_violation + 0.05);
  for (const auto& p : curve) {
    CHECK(p.mean_violation >= 0.0);
    CHECK(p.mean_violation <= 1.0);
  }
  std::ostringstream out;
  write_uc_csv(out, curve);
  CHECK(out.str().rfind("m,trials,infeasible,mean_violation\n", 0) == 0);

  UcConfig bad = cfg;
  bad.m_values.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("uniform convergence with a near-trivial target") {
  UcConfig cfg;
  cfg.m_values = {10};
  cfg.trials = 4;
  cfg.fresh_domains = 100;
  cfg.gamma = 0.999;
  cfg.trainer.epochs = 10;
  const auto curve = empirical_uniform_convergence(cfg);
  CHECK(curve[0].mean_violation <= 0.05);
}

TEST_CASE("closed form recall matches Monte Carlo") {
  auto fam_cfg = SyntheticConfig::benchmark_10d();
  const GaussianDomainFamily family(fam_cfg);
  Rng rng = make_rng(53, 0);
  const auto params = family.sample_params(0, rng);
  Scorer s = Scorer::linear(10, 2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& p : s.params()) p = n(rng);
  const auto block = family.sample_block(params, 20000, rng);
  for (int y = 0; y < 2; ++y) {
    std::size_t cnt = 0, hit = 0;
    for (std::size_t r = 0; r < block.size(); ++r) {
      if (block.labels[r] != y) continue;
      ++cnt;
      hit += score(s, block.row(r, 10))[static_cast<std::size_t>(y)] >= 0.0 ? 1 : 0;
    }
    const double mc = static_cast<double>(hit) / static_cast<double>(cnt);
    CHECK(std::abs(mc - closed_form_recall(s, family, params, y)) <= 4.0 * 0.5 / std::sqrt(cnt));
  }
}
