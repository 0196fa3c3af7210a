#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "idr/errors.hpp"
#include "idr/stats.hpp"

using namespace idr;

namespace {

// Adaptive Simpson quadrature, used as an independent oracle for tail
// probabilities of the t distribution.
double simpson(double (*f)(double, double), double df, double a, double b) {
  const int n = 20000;  // fine fixed grid; the integrand is smooth
  const double h = (b - a) / n;
  double total = f(a, df) + f(b, df);
  for (int i = 1; i < n; ++i)
    total += f(a + i * h, df) * (i % 2 ? 4.0 : 2.0);
  return total * h / 3.0;
}

double t_pdf(double x, double df) {
  const double c = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                   0.5 * std::log(df * M_PI);
  return std::exp(c - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

double t_two_tailed_by_quadrature(double t, double df) {
  const double a = std::abs(t);
  return 2.0 * simpson(t_pdf, df, a, a + 400.0);
}

DesignMatrix simple_design(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           std::vector<std::string> names,
                           std::vector<std::int32_t> entity = {}) {
  DesignMatrix d;
  d.X = x;
  d.y = y;
  d.names = std::move(names);
  d.entity = std::move(entity);
  return d;
}

double poisson_ll(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& beta) {
  double ll = 0;
  Eigen::VectorXd eta = x * beta;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    ll += y(i) * eta(i) - std::exp(eta(i)) - std::lgamma(y(i) + 1.0);
  return ll;
}

}  // namespace

TEST_CASE("regularized incomplete beta matches reference values") {
  // Reference values computed with 30-digit arithmetic.
  CHECK(regularized_incomplete_beta(0.5, 0.5, 0.25) ==
        doctest::Approx(0.33333333333333333).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(2, 3, 0.4) ==
        doctest::Approx(0.52480000000000004).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(5, 0.5, 0.9) ==
        doctest::Approx(0.31664291502001231).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(10, 10, 0.5) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(0.5, 5, 0.01) ==
        doctest::Approx(0.2428418908984375).epsilon(1e-12));
  CHECK(regularized_incomplete_beta(1, 1, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(1, 1, 1.0) == 1.0);
}

TEST_CASE("t-distribution two-tailed p-values") {
  CHECK(student_t_two_tailed_p(2.0, 10) ==
        doctest::Approx(0.073388034770740366).epsilon(1e-12));
  CHECK(student_t_two_tailed_p(1.0, 3) ==
        doctest::Approx(0.39100221895577064).epsilon(1e-12));
  CHECK(student_t_two_tailed_p(2.5, 30) ==
        doctest::Approx(0.018115649068066694).epsilon(1e-12));
  CHECK(student_t_two_tailed_p(0.5, 100) ==
        doctest::Approx(0.61817356583088657).epsilon(1e-12));
  CHECK(student_t_two_tailed_p(0.0, 12) == doctest::Approx(1.0).epsilon(1e-12));

  // Independent quadrature oracle.
  for (double t : {0.7, 1.8, 3.1}) {
    for (double df : {6.0, 17.9, 40.0}) {
      CHECK(student_t_two_tailed_p(t, df) ==
            doctest::Approx(t_two_tailed_by_quadrature(t, df)).epsilon(1e-8));
    }
  }
}

TEST_CASE("pearson correlation") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y = {2, 4, 6, 8, 10};
  std::vector<double> ny = {-2, -4, -6, -8, -10};
  CHECK(pearson_corr(x, y) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pearson_corr(x, ny) == doctest::Approx(-1.0).epsilon(1e-14));

  // Fixture against the direct covariance formula.
  std::vector<double> a = {1.2, 0.4, 2.2, 1.9, 0.1, 1.1};
  std::vector<double> b = {0.5, 1.5, 0.4, 0.7, 2.2, 0.9};
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  CHECK(pearson_corr(a, b) ==
        doctest::Approx(cov / std::sqrt(va * vb)).epsilon(1e-14));

  std::vector<double> flat = {1, 1, 1, 1};
  CHECK_THROWS_AS(pearson_corr(flat, a), NumericError);
  std::vector<double> tiny = {1, 2};
  CHECK_THROWS_AS(pearson_corr(tiny, tiny), DataError);
}

TEST_CASE("welch t-test: identical groups and separated groups") {
  std::vector<double> a = {1, 2, 3, 4};
  auto same = welch_ttest(a, a);
  CHECK(same.t == 0.0);
  CHECK(same.p == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> lo = {0.0, 0.001, -0.001, 0.0005};
  std::vector<double> hi = {1.0, 1.001, 0.999, 1.0005};
  auto sep = welch_ttest(lo, hi);
  CHECK(sep.p < 1e-10);
}

TEST_CASE("welch t-test matches the frozen high-precision fixture") {
  std::vector<double> a = {12.9, 13.4, 12.8, 13.7, 13.1, 12.6, 13.5, 12.7, 13.0, 13.2};
  std::vector<double> b = {12.0, 12.4, 11.8, 12.9, 12.1, 11.9, 12.6, 12.3, 12.2, 12.5};
  auto res = welch_ttest(a, b);
  CHECK(res.t == doctest::Approx(5.2328582466816597).epsilon(1e-12));
  CHECK(res.df == doctest::Approx(17.939819821878819).epsilon(1e-12));
  CHECK(res.p == doctest::Approx(5.6845456512495737e-5).epsilon(1e-9));
  // Quadrature oracle at the spec'd 1e-6 comparison level.
  CHECK(res.p ==
        doctest::Approx(t_two_tailed_by_quadrature(res.t, res.df)).epsilon(1e-6));
}

TEST_CASE("paired t-test matches the frozen fixture") {
  std::vector<double> d = {1.2, 0.4, -0.3, 0.8, 1.5, 0.9, 0.2, 1.1};
  auto res = paired_ttest(d);
  CHECK(res.t == doctest::Approx(3.4768226425696509).epsilon(1e-12));
  CHECK(res.df == 7.0);
  CHECK(res.p == doctest::Approx(0.010310406444438118).epsilon(1e-10));
}

TEST_CASE("within transformation demeans every column per entity") {
  Eigen::MatrixXd x(6, 3);
  // Columns: varying, entity-constant, intercept.
  x << 1, 5, 1,  //
      2, 5, 1,   //
      3, 5, 1,   //
      4, 9, 1,   //
      6, 9, 1,   //
      8, 9, 1;
  Eigen::VectorXd y(6);
  y << 1, 2, 3, 10, 20, 30;
  auto d = simple_design(x, y, {"x", "constant_within", "intercept"},
                         {0, 0, 0, 1, 1, 1});
  auto res = within_demean(d);
  CHECK(res.dropped == std::vector<std::string>{"constant_within", "intercept"});
  REQUIRE(res.design.names == std::vector<std::string>{"x"});

  // Brute-force group-mean oracle.
  const double m0 = (1 + 2 + 3) / 3.0, m1 = (4 + 6 + 8) / 3.0;
  Eigen::VectorXd expect(6);
  expect << 1 - m0, 2 - m0, 3 - m0, 4 - m1, 6 - m1, 8 - m1;
  CHECK((res.design.X.col(0) - expect).cwiseAbs().maxCoeff() < 1e-12);
  const double my0 = 2.0, my1 = 20.0;
  Eigen::VectorXd expect_y(6);
  expect_y << -1, 0, 1, -10, 0, 10;
  (void)my0;
  (void)my1;
  CHECK((res.design.y - expect_y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(res.design.demeaned);

  // Single entity: every column ends up zero-mean.
  auto single = simple_design(x.col(0), y, {"x"}, {7, 7, 7, 7, 7, 7});
  auto res1 = within_demean(single);
  CHECK(std::abs(res1.design.X.col(0).sum()) < 1e-12);
}

TEST_CASE("ols recovers an exact linear relationship") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  const int n = 60;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = noise(rng);
    x(i, 1) = noise(rng);
    x(i, 2) = 1.0;
    y(i) = 2.0 * x(i, 0) - 3.0 * x(i, 1) + 0.5;
  }
  auto res = ols(simple_design(x, y, {"a", "b", "intercept"}));
  CHECK(res.coefficient("a") == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(res.coefficient("b") == doctest::Approx(-3.0).epsilon(1e-10));
  CHECK(res.coefficient("intercept") == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(res.sigma2 < 1e-18);

  // Residual orthogonality.
  Eigen::VectorXd resid = y - x * res.coef;
  CHECK((x.transpose() * resid).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ols planted-coefficient recovery within analytic bands") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 1.0);
  const int n = 400;
  const double sigma = 0.7;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = noise(rng);
    x(i, 1) = noise(rng);
    x(i, 2) = 1.0;
    y(i) = 2.0 * x(i, 0) - 3.0 * x(i, 1) + 1.0 + sigma * noise(rng);
  }
  auto res = ols(simple_design(x, y, {"x1", "x2", "intercept"}));

  // Closed-form OLS sampling variance with known sigma.
  Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
  const double se1 = sigma * std::sqrt(xtx_inv(0, 0));
  const double se2 = sigma * std::sqrt(xtx_inv(1, 1));
  CHECK(std::abs(res.coefficient("x1") - 2.0) < 3.0 * se1);
  CHECK(std::abs(res.coefficient("x2") + 3.0) < 3.0 * se2);
  CHECK(res.stderr_classical("x1") == doctest::Approx(se1).epsilon(0.25));

  // Pure-noise outcome: estimates stay within 3 SE of zero.
  Eigen::VectorXd noise_y(n);
  for (int i = 0; i < n; ++i) noise_y(i) = noise(rng);
  auto null_res = ols(simple_design(x, noise_y, {"x1", "x2", "intercept"}));
  CHECK(std::abs(null_res.coefficient("x1")) <
        3.0 * null_res.stderr_classical("x1"));
  CHECK(std::abs(null_res.coefficient("x2")) <
        3.0 * null_res.stderr_classical("x2"));
}

TEST_CASE("ols names the collinear column on rank deficiency") {
  Eigen::MatrixXd x(5, 3);
  for (int i = 0; i < 5; ++i) {
    x(i, 0) = i + 1;
    x(i, 1) = 2.0 * (i + 1);  // exact duplicate direction
    x(i, 2) = 1.0;
  }
  Eigen::VectorXd y(5);
  y << 1, 2, 3, 4, 5;
  CHECK_THROWS_WITH_AS(ols(simple_design(x, y, {"x", "x_times_2", "intercept"})),
                       doctest::Contains("rank deficient"), NumericError);
}

TEST_CASE("demean-then-ols equals dummy-variable ols (FWL)") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> d_entity(0, 19);
  const int n = 300;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  std::vector<std::int32_t> entity(n);
  std::vector<double> effects(20);
  for (auto& e : effects) e = 2.0 * noise(rng);
  for (int i = 0; i < n; ++i) {
    entity[i] = d_entity(rng);
    x(i, 0) = noise(rng);
    x(i, 1) = noise(rng);
    y(i) = 1.5 * x(i, 0) - 0.8 * x(i, 1) + effects[entity[i]] + 0.3 * noise(rng);
  }

  auto demeaned = within_demean(simple_design(x, y, {"x1", "x2"}, entity));
  auto fe = ols(demeaned.design);

  // Explicit dummies (first entity as baseline) plus an intercept.
  Eigen::MatrixXd xd = Eigen::MatrixXd::Zero(n, 2 + 19 + 1);
  xd.leftCols(2) = x;
  for (int i = 0; i < n; ++i) {
    if (entity[i] > 0) xd(i, 1 + entity[i]) = 1.0;
    xd(i, 21) = 1.0;
  }
  std::vector<std::string> names = {"x1", "x2"};
  for (int e = 1; e < 20; ++e) names.push_back("d" + std::to_string(e));
  names.push_back("intercept");
  auto dummies = ols(simple_design(xd, y, names));

  CHECK(std::abs(fe.coefficient("x1") - dummies.coefficient("x1")) < 1e-8);
  CHECK(std::abs(fe.coefficient("x2") - dummies.coefficient("x2")) < 1e-8);

  // Entity-level shifts of a regressor leave the FE estimates unchanged.
  Eigen::MatrixXd shifted = x;
  for (int i = 0; i < n; ++i) shifted(i, 0) += 5.0 * (entity[i] + 1);
  auto shifted_fit =
      ols(within_demean(simple_design(shifted, y, {"x1", "x2"}, entity)).design);
  CHECK(std::abs(fe.coefficient("x1") - shifted_fit.coefficient("x1")) < 1e-8);
  CHECK(std::abs(fe.coefficient("x2") - shifted_fit.coefficient("x2")) < 1e-8);
}

TEST_CASE("cluster-robust standard errors are available behind a flag") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> noise(0.0, 1.0);
  const int n = 200;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  std::vector<std::int32_t> entity(n);
  for (int i = 0; i < n; ++i) {
    entity[i] = i / 10;
    x(i, 0) = noise(rng);
    x(i, 1) = 1.0;
    y(i) = x(i, 0) + noise(rng);
  }
  OlsOptions opts;
  opts.cluster_by_entity = true;
  auto res = ols(simple_design(x, y, {"x", "intercept"}, entity), opts);
  REQUIRE(res.se_cluster.has_value());
  CHECK((*res.se_cluster)(0) > 0.0);
}

TEST_CASE("poisson intercept-only fit returns ln(mean)") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(8, 1);
  Eigen::VectorXd y(8);
  y << 0, 1, 2, 3, 4, 5, 6, 7;  // mean 3.5
  auto res = poisson_irls(simple_design(x, y, {"intercept"}));
  CHECK(res.converged);
  CHECK(res.coefficient("intercept") ==
        doctest::Approx(std::log(3.5)).epsilon(1e-10));
}

TEST_CASE("poisson planted recovery, score condition, and ll monotonicity") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = 2000;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = noise(rng);
    x(i, 1) = 1.0;
    const double lambda = std::exp(0.5 + 1.0 * x(i, 0));
    // Inverse-transform Poisson draw.
    double u = unit(rng), p = std::exp(-lambda), c = p;
    int k = 0;
    while (u > c && k < 1000) {
      ++k;
      p *= lambda / k;
      c += p;
    }
    y(i) = k;
  }
  auto d = simple_design(x, y, {"x", "intercept"});
  auto res = poisson_irls(d);
  CHECK(res.converged);
  CHECK(std::abs(res.coefficient("x") - 1.0) < 3.0 * res.stderr_classical("x"));
  CHECK(std::abs(res.coefficient("intercept") - 0.5) <
        3.0 * res.stderr_classical("intercept"));

  // Score vector vanishes at the optimum ...
  Eigen::VectorXd mu = (x * res.coef).array().exp();
  CHECK((x.transpose() * (y - mu)).cwiseAbs().maxCoeff() < 1e-6);

  // ... and matches central finite differences of the log-likelihood.
  const double h = 1e-5;
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd up = res.coef, down = res.coef;
    up(j) += h;
    down(j) -= h;
    const double fd = (poisson_ll(x, y, up) - poisson_ll(x, y, down)) / (2 * h);
    CHECK(std::abs(fd) < 1e-4);
  }

  // Log-likelihood never decreases across iterations.
  REQUIRE(res.ll_trace.size() >= 2);
  for (std::size_t i = 1; i < res.ll_trace.size(); ++i)
    CHECK(res.ll_trace[i] >= res.ll_trace[i - 1] - 1e-12);
  CHECK(*res.log_likelihood == doctest::Approx(res.ll_trace.back()));
}

TEST_CASE("poisson error paths") {
  // Separation: a binary regressor perfectly predicts zero counts.
  Eigen::MatrixXd x(10, 2);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = i < 5 ? 1.0 : 0.0;
    x(i, 1) = 1.0;
    y(i) = i < 5 ? 0.0 : 4.0;
  }
  CHECK_THROWS_AS(poisson_irls(simple_design(x, y, {"sep", "intercept"})),
                  NumericError);

  // Non-convergence within a starved iteration budget.
  std::mt19937_64 rng(53);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::MatrixXd x2(50, 2);
  Eigen::VectorXd y2(50);
  for (int i = 0; i < 50; ++i) {
    x2(i, 0) = noise(rng);
    x2(i, 1) = 1.0;
    y2(i) = static_cast<double>(i % 7);
  }
  IrlsOptions starved;
  starved.max_iter = 1;
  CHECK_THROWS_WITH_AS(
      poisson_irls(simple_design(x2, y2, {"x", "intercept"}), starved),
      doctest::Contains("convergence"), NumericError);

  // Negative and non-integer outcomes are rejected.
  Eigen::VectorXd bad(50);
  bad.setConstant(1.5);
  CHECK_THROWS_AS(poisson_irls(simple_design(x2, bad, {"x", "intercept"})),
                  DataError);
}

TEST_CASE("design matrix validation") {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  auto d = simple_design(x, y, {"x"});
  d.add_column("z", Eigen::VectorXd::Ones(3));
  CHECK(d.n_cols() == 2);
  CHECK(d.col("z") == 1);
  CHECK(d.col("missing") == -1);
  CHECK_THROWS_AS(d.add_column("z", Eigen::VectorXd::Ones(3)), DataError);

  d.X(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(d.validate(), doctest::Contains("non-finite"), DataError);
}
