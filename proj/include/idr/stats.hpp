#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace idr {

enum class OutcomeKind { LogContinuous, Count };

// Named regressor columns with an outcome and a per-row entity id.
// The intercept is an ordinary column named "intercept" (added explicitly,
// dropped by the within transformation like any entity-constant column).
struct DesignMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::int32_t> entity;
  OutcomeKind outcome = OutcomeKind::LogContinuous;
  bool demeaned = false;

  int n_rows() const { return static_cast<int>(X.rows()); }
  int n_cols() const { return static_cast<int>(X.cols()); }
  int n_entities() const;
  int col(std::string_view name) const;  // -1 when absent
  void add_column(const std::string& name, const Eigen::VectorXd& v);
  // Throws DataError on non-finite entries, duplicate names, shape mismatch.
  void validate() const;
};

struct RegressionResult {
  std::vector<std::string> names;
  Eigen::VectorXd coef;
  Eigen::VectorXd se_classical;
  Eigen::VectorXd se_hc1;
  std::optional<Eigen::VectorXd> se_cluster;  // filled when requested
  int n_obs = 0;
  int n_entities = 0;
  int rank = 0;
  double sigma2 = 0;  // OLS residual variance
  std::optional<double> log_likelihood;
  std::vector<double> ll_trace;  // per-iteration log-likelihood (IRLS only)
  int iterations = 0;
  double final_step = 0;
  bool converged = true;

  double coefficient(std::string_view name) const;
  double stderr_classical(std::string_view name) const;
  double stderr_hc1(std::string_view name) const;
};

double pearson_corr(std::span<const double> x, std::span<const double> y);

struct TTest {
  double t = 0;
  double df = 0;
  double p = 1;  // two-tailed
};

TTest welch_ttest(std::span<const double> a, std::span<const double> b);
TTest paired_ttest(std::span<const double> diffs);

struct DemeanResult {
  DesignMatrix design;
  std::vector<std::string> dropped;  // entity-constant columns
};

// Subtracts entity means from every column and the outcome; columns that
// become numerically zero (time-invariant regressors, the intercept) are
// dropped and reported.
DemeanResult within_demean(const DesignMatrix& design);

struct OlsOptions {
  bool cluster_by_entity = false;
};

// Least squares via rank-revealing column-pivoted QR. Residual degrees of
// freedom account for entity means absorbed by a prior within transform.
// Throws NumericError naming the offending column on rank deficiency.
RegressionResult ols(const DesignMatrix& design, const OlsOptions& opts = {});

struct IrlsOptions {
  int max_iter = 50;
  double tol = 1e-8;  // max-norm of the coefficient step
};

// Poisson log-link maximum likelihood by iteratively reweighted least
// squares with step halving, so the log-likelihood never decreases.
// Throws NumericError on rank deficiency, separation, or non-convergence.
RegressionResult poisson_irls(const DesignMatrix& design,
                              const IrlsOptions& opts = {});

// Continued-fraction regularized incomplete beta I_x(a,b), relative
// tolerance 1e-12; basis for every t-distribution tail probability here.
double regularized_incomplete_beta(double a, double b, double x);
double student_t_two_tailed_p(double t, double df);

}  // namespace idr
