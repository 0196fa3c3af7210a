#include "idr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "idr/errors.hpp"
#include "idr/strutil.hpp"

namespace idr {

int DesignMatrix::n_entities() const {
  std::set<std::int32_t> uniq(entity.begin(), entity.end());
  return static_cast<int>(uniq.size());
}

int DesignMatrix::col(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

void DesignMatrix::add_column(const std::string& name, const Eigen::VectorXd& v) {
  if (col(name) >= 0) throw DataError("design: duplicate column '" + name + "'");
  if (X.cols() == 0) {
    X.resize(v.size(), 1);
    X.col(0) = v;
  } else {
    if (v.size() != X.rows()) throw DataError("design: column length mismatch");
    X.conservativeResize(Eigen::NoChange, X.cols() + 1);
    X.col(X.cols() - 1) = v;
  }
  names.push_back(name);
}

void DesignMatrix::validate() const {
  if (static_cast<int>(names.size()) != X.cols())
    throw DataError("design: name/column count mismatch");
  if (y.size() != X.rows()) throw DataError("design: outcome length mismatch");
  if (!entity.empty() && static_cast<Eigen::Index>(entity.size()) != X.rows())
    throw DataError("design: entity vector length mismatch");
  std::set<std::string> uniq(names.begin(), names.end());
  if (uniq.size() != names.size())
    throw DataError("design: duplicate column names");
  if (!X.allFinite() || !y.allFinite())
    throw DataError("design: non-finite entries");
}

double RegressionResult::coefficient(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return coef(static_cast<Eigen::Index>(i));
  throw DataError("no coefficient named '" + std::string(name) + "'");
}

double RegressionResult::stderr_classical(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return se_classical(static_cast<Eigen::Index>(i));
  throw DataError("no coefficient named '" + std::string(name) + "'");
}

double RegressionResult::stderr_hc1(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return se_hc1(static_cast<Eigen::Index>(i));
  throw DataError("no coefficient named '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Special functions

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 400;
  constexpr double kEps = 1e-14;
  constexpr double kTiny = 1e-300;

  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw NumericError("incomplete beta: a,b must be > 0");
  if (x < 0.0 || x > 1.0) throw NumericError("incomplete beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, double df) {
  if (!(df > 0)) throw NumericError("t distribution: df must be > 0");
  if (!std::isfinite(t)) return 0.0;
  const double x = df / (df + t * t);
  return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

// ---------------------------------------------------------------------------
// Correlation and t-tests

namespace {

std::pair<double, double> mean_var(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  double m = 0;
  for (double x : v) m += x;
  m /= n;
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, ss / (n - 1.0)};
}

}  // namespace

double pearson_corr(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("pearson: unequal lengths");
  if (x.size() < 3) throw DataError("pearson: need at least 3 observations");
  auto [mx, vx] = mean_var(x);
  auto [my, vy] = mean_var(y);
  if (vx == 0.0 || vy == 0.0) throw NumericError("pearson: zero variance");
  double cov = 0;
  for (std::size_t i = 0; i < x.size(); ++i) cov += (x[i] - mx) * (y[i] - my);
  cov /= static_cast<double>(x.size() - 1);
  return std::clamp(cov / std::sqrt(vx * vy), -1.0, 1.0);
}

TTest welch_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw DataError("welch t-test: each group needs at least 2 observations");
  auto [ma, va] = mean_var(a);
  auto [mb, vb] = mean_var(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double se2 = va / na + vb / nb;
  if (se2 == 0.0) {
    if (ma == mb) return {0.0, na + nb - 2.0, 1.0};
    throw NumericError("welch t-test: zero variance in both groups");
  }
  TTest out;
  out.t = (ma - mb) / std::sqrt(se2);
  out.df = se2 * se2 /
           (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
  out.p = student_t_two_tailed_p(out.t, out.df);
  return out;
}

TTest paired_ttest(std::span<const double> diffs) {
  if (diffs.size() < 2)
    throw DataError("paired t-test: need at least 2 differences");
  auto [m, v] = mean_var(diffs);
  const double n = static_cast<double>(diffs.size());
  if (v == 0.0) {
    if (m == 0.0) return {0.0, n - 1.0, 1.0};
    throw NumericError("paired t-test: zero variance with nonzero mean");
  }
  TTest out;
  out.t = m / std::sqrt(v / n);
  out.df = n - 1.0;
  out.p = student_t_two_tailed_p(out.t, out.df);
  return out;
}

// ---------------------------------------------------------------------------
// Within transformation

DemeanResult within_demean(const DesignMatrix& design) {
  design.validate();
  if (design.entity.empty())
    throw DataError("within transformation needs entity ids");

  const Eigen::Index n = design.X.rows();
  std::unordered_map<std::int32_t, std::pair<Eigen::VectorXd, double>> groups;
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& [sum, count] = groups
                             .try_emplace(design.entity[static_cast<std::size_t>(i)],
                                          Eigen::VectorXd::Zero(design.X.cols() + 1),
                                          0.0)
                             .first->second;
    sum.head(design.X.cols()) += design.X.row(i).transpose();
    sum(design.X.cols()) += design.y(i);
    count += 1.0;
  }

  Eigen::MatrixXd xd = design.X;
  Eigen::VectorXd yd = design.y;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [sum, count] = groups.at(design.entity[static_cast<std::size_t>(i)]);
    xd.row(i) -= (sum.head(design.X.cols()) / count).transpose();
    yd(i) -= sum(design.X.cols()) / count;
  }

  DemeanResult out;
  out.design.outcome = design.outcome;
  out.design.entity = design.entity;
  out.design.demeaned = true;
  out.design.y = yd;
  for (Eigen::Index c = 0; c < design.X.cols(); ++c) {
    const double scale = std::max(1.0, design.X.col(c).cwiseAbs().maxCoeff());
    if (xd.col(c).cwiseAbs().maxCoeff() <= 1e-9 * scale) {
      out.dropped.push_back(design.names[static_cast<std::size_t>(c)]);
      continue;
    }
    out.design.add_column(design.names[static_cast<std::size_t>(c)], xd.col(c));
  }
  if (out.design.X.cols() == 0)
    throw NumericError("within transformation dropped every column");
  return out;
}

// ---------------------------------------------------------------------------
// OLS

namespace {

struct QrParts {
  Eigen::VectorXd coef;
  Eigen::MatrixXd xtx_inv;
  int rank = 0;
};

// Rank-revealing solve; throws naming the first dependent column.
QrParts qr_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                 const std::vector<std::string>& names) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  const int k = static_cast<int>(x.cols());
  QrParts out;
  out.rank = static_cast<int>(qr.rank());
  if (out.rank < k) {
    const auto& perm = qr.colsPermutation().indices();
    const int offending = perm(out.rank);
    throw NumericError("design is rank deficient: column '" +
                       names[static_cast<std::size_t>(offending)] +
                       "' is collinear with the others");
  }
  out.coef = qr.solve(y);
  Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd body = r_inv * r_inv.transpose();
  out.xtx_inv = qr.colsPermutation() * body * qr.colsPermutation().transpose();
  return out;
}

Eigen::VectorXd hc1_se(const Eigen::MatrixXd& x, const Eigen::VectorXd& resid,
                       const Eigen::MatrixXd& xtx_inv, double small_sample) {
  Eigen::MatrixXd meat =
      x.transpose() * resid.array().square().matrix().asDiagonal() * x;
  Eigen::MatrixXd v = xtx_inv * meat * xtx_inv * small_sample;
  return v.diagonal().cwiseMax(0.0).cwiseSqrt();
}

Eigen::VectorXd cluster_se(const Eigen::MatrixXd& x, const Eigen::VectorXd& resid,
                           const Eigen::MatrixXd& xtx_inv,
                           const std::vector<std::int32_t>& entity, double dof) {
  std::unordered_map<std::int32_t, Eigen::VectorXd> sums;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    auto& s = sums.try_emplace(entity[static_cast<std::size_t>(i)],
                               Eigen::VectorXd::Zero(x.cols()))
                  .first->second;
    s += x.row(i).transpose() * resid(i);
  }
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  for (const auto& [id, s] : sums) meat += s * s.transpose();
  const double g = static_cast<double>(sums.size());
  const double n = static_cast<double>(x.rows());
  if (g < 2) throw NumericError("cluster-robust errors need at least 2 entities");
  const double factor = g / (g - 1.0) * (n - 1.0) / dof;
  Eigen::MatrixXd v = xtx_inv * meat * xtx_inv * factor;
  return v.diagonal().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace

RegressionResult ols(const DesignMatrix& design, const OlsOptions& opts) {
  design.validate();
  const Eigen::Index n = design.X.rows();
  const int k = static_cast<int>(design.X.cols());
  if (n <= k) throw NumericError("ols: more columns than observations");

  QrParts qr = qr_solve(design.X, design.y, design.names);
  Eigen::VectorXd resid = design.y - design.X * qr.coef;
  const int absorbed = design.demeaned ? design.n_entities() : 0;
  const double dof = static_cast<double>(n) - k - absorbed;
  if (dof < 1)
    throw NumericError("ols: no residual degrees of freedom after fixed effects");

  RegressionResult out;
  out.names = design.names;
  out.coef = qr.coef;
  out.rank = qr.rank;
  out.n_obs = static_cast<int>(n);
  out.n_entities = design.n_entities();
  out.sigma2 = resid.squaredNorm() / dof;
  out.se_classical = (out.sigma2 * qr.xtx_inv.diagonal().cwiseMax(0.0)).cwiseSqrt();
  out.se_hc1 = hc1_se(design.X, resid, qr.xtx_inv, static_cast<double>(n) / dof);
  if (opts.cluster_by_entity) {
    if (design.entity.empty())
      throw DataError("cluster-robust errors need entity ids");
    out.se_cluster = cluster_se(design.X, resid, qr.xtx_inv, design.entity, dof);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Poisson IRLS

namespace {

double poisson_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double ll = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    ll += y(i) * eta(i) - std::exp(eta(i)) - std::lgamma(y(i) + 1.0);
  }
  return ll;
}

}  // namespace

RegressionResult poisson_irls(const DesignMatrix& design, const IrlsOptions& opts) {
  design.validate();
  const Eigen::Index n = design.X.rows();
  const int k = static_cast<int>(design.X.cols());
  if (n <= k) throw NumericError("poisson: more columns than observations");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (design.y(i) < 0 || design.y(i) != std::floor(design.y(i)))
      throw DataError("poisson: outcome must be a nonnegative count");
  }
  if (design.y.maxCoeff() <= 0)
    throw NumericError("poisson: outcome is identically zero");

  // Rank check once on the unweighted design.
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.X);
    if (qr.rank() < k) {
      const int offending = qr.colsPermutation().indices()(qr.rank());
      throw NumericError("design is rank deficient: column '" +
                         design.names[static_cast<std::size_t>(offending)] +
                         "' is collinear with the others");
    }
  }

  Eigen::VectorXd mu = design.y.array() + 0.5;
  Eigen::VectorXd eta = mu.array().log();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  double ll = poisson_loglik(design.y, eta);
  bool have_beta = false;

  RegressionResult out;
  out.names = design.names;
  out.converged = false;

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    Eigen::VectorXd w = mu;
    Eigen::VectorXd z = eta.array() + (design.y - mu).array() / mu.array();
    Eigen::MatrixXd xtwx = design.X.transpose() * w.asDiagonal() * design.X;
    Eigen::VectorXd xtwz = design.X.transpose() * (w.array() * z.array()).matrix();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtwx);
    if (ldlt.info() != Eigen::Success)
      throw NumericError("poisson: weighted normal equations are singular");
    Eigen::VectorXd beta_new = ldlt.solve(xtwz);

    // Step halving keeps the log-likelihood non-decreasing.
    double step_scale = 1.0;
    Eigen::VectorXd candidate = beta_new;
    for (int half = 0; half < 40; ++half) {
      Eigen::VectorXd eta_c = design.X * candidate;
      if (eta_c.cwiseAbs().maxCoeff() > 300.0)
        throw NumericError(
            "poisson: diverging linear predictor (separation suspected)");
      double ll_c = poisson_loglik(design.y, eta_c);
      if (!have_beta || ll_c >= ll - 1e-12) {
        beta_new = candidate;
        eta = eta_c;
        ll = ll_c;
        break;
      }
      if (half == 39)
        throw NumericError("poisson: step halving failed to improve likelihood");
      step_scale *= 0.5;
      candidate = beta + step_scale * (beta_new - beta);
    }
    mu = eta.array().exp();
    out.ll_trace.push_back(ll);

    const double step =
        have_beta ? (beta_new - beta).cwiseAbs().maxCoeff()
                  : std::numeric_limits<double>::infinity();
    beta = beta_new;
    have_beta = true;
    out.iterations = iter;
    out.final_step = step;
    if (step < opts.tol) {
      out.converged = true;
      break;
    }
    if (beta.cwiseAbs().maxCoeff() > 1e4)
      throw NumericError(
          "poisson: coefficient norm diverging (separation suspected)");
  }
  if (!out.converged)
    throw NumericError("poisson: no convergence within " +
                       std::to_string(opts.max_iter) + " iterations");

  Eigen::MatrixXd xtwx = design.X.transpose() * mu.asDiagonal() * design.X;
  Eigen::MatrixXd info_inv =
      Eigen::LDLT<Eigen::MatrixXd>(xtwx).solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::VectorXd score_resid = design.y - mu;
  const double dof = static_cast<double>(n) - k;
  if (dof < 1) throw NumericError("poisson: no residual degrees of freedom");

  out.coef = beta;
  out.n_obs = static_cast<int>(n);
  out.n_entities = design.n_entities();
  out.rank = k;
  out.log_likelihood = ll;
  out.se_classical = info_inv.diagonal().cwiseMax(0.0).cwiseSqrt();
  out.se_hc1 =
      hc1_se(design.X, score_resid, info_inv, static_cast<double>(n) / dof);
  return out;
}

}  // namespace idr
