#include "idr/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include "idr/csv.hpp"
#include "idr/errors.hpp"
#include "idr/strutil.hpp"

namespace idr {

const RegressionResult& ModelSuiteReport::result(std::string_view model) const {
  for (const auto& [name, res] : models)
    if (name == model) return res;
  throw DataError("no model named '" + std::string(model) + "' in report");
}

namespace {

struct Rows {
  std::vector<const PersonYearRow*> rows;
  std::vector<std::int32_t> entity;       // dense person index per row
  std::vector<std::string> periods;       // sorted distinct period labels
  std::map<std::string, int> period_idx;
  int n_persons = 0;
};

Rows select_rows(const std::vector<PersonYearRow>& all, bool need_field_idr,
                 std::vector<std::string>& warnings) {
  Rows out;
  std::map<std::string, std::int32_t> person_idx;
  std::set<std::string> periods;
  int missing_field = 0;
  for (const auto& r : all) {
    if (r.excluded) continue;
    if (need_field_idr && !r.field_idr) {
      ++missing_field;
      continue;
    }
    out.rows.push_back(&r);
    periods.insert(r.period);
  }
  if (missing_field)
    warnings.push_back(std::to_string(missing_field) +
                       " row(s) without field IDR dropped from interaction models");
  for (const auto* r : out.rows) {
    auto [it, inserted] = person_idx.try_emplace(
        r->person_id, static_cast<std::int32_t>(person_idx.size()));
    out.entity.push_back(it->second);
  }
  out.n_persons = static_cast<int>(person_idx.size());
  out.periods.assign(periods.begin(), periods.end());
  for (std::size_t i = 0; i < out.periods.size(); ++i)
    out.period_idx[out.periods[i]] = static_cast<int>(i);
  return out;
}

struct ColumnSpec {
  bool interaction = false;   // idr, field_idr, idr_x_field
  bool reach = false;         // mean_reach
  bool log_productivity = false;
  bool person_dummies = false;
  bool intercept = true;
};

DesignMatrix build_design(const Rows& sel, OutcomeKind kind, bool count_outcome,
                          const ColumnSpec& spec) {
  const Eigen::Index n = static_cast<Eigen::Index>(sel.rows.size());
  std::vector<std::string> names;
  names.push_back("idr");
  if (spec.interaction) {
    names.push_back("field_idr");
    names.push_back("idr_x_field");
  }
  names.push_back("mean_authors");
  names.push_back("mean_jif");
  names.push_back("repeat_collab_share");
  if (spec.reach) names.push_back("mean_reach");
  if (spec.log_productivity) names.push_back("log_productivity");
  names.push_back("lag_cum_pubs");
  names.push_back("lag_cum_cites_log");
  names.push_back("professional_age");
  // First period is the baseline.
  for (std::size_t p = 1; p < sel.periods.size(); ++p)
    names.push_back("period_" + sel.periods[p]);
  int first_dummy_col = -1;
  if (spec.person_dummies) {
    first_dummy_col = static_cast<int>(names.size());
    for (std::int32_t e = 1; e < sel.n_persons; ++e)
      names.push_back("person_" + std::to_string(e));
  }
  if (spec.intercept) names.push_back("intercept");

  DesignMatrix d;
  d.names = names;
  d.outcome = kind;
  d.entity = sel.entity;
  d.X = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(names.size()));
  d.y = Eigen::VectorXd::Zero(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    const PersonYearRow& r = *sel.rows[static_cast<std::size_t>(i)];
    int c = 0;
    d.X(i, c++) = *r.mean_idr;
    if (spec.interaction) {
      d.X(i, c++) = *r.field_idr;
      d.X(i, c++) = *r.mean_idr * *r.field_idr;
    }
    d.X(i, c++) = r.mean_authors;
    d.X(i, c++) = r.mean_jif;
    d.X(i, c++) = r.repeat_collab_share;
    if (spec.reach) d.X(i, c++) = r.mean_reach;
    if (spec.log_productivity) d.X(i, c++) = std::log(static_cast<double>(r.productivity));
    d.X(i, c++) = static_cast<double>(r.lag_cum_pubs);
    d.X(i, c++) = r.lag_cum_cites_log;
    d.X(i, c++) = static_cast<double>(r.professional_age);
    int p = sel.period_idx.at(r.period);
    if (p > 0) d.X(i, c + p - 1) = 1.0;
    c += static_cast<int>(sel.periods.size()) - 1;
    if (spec.person_dummies) {
      std::int32_t e = sel.entity[static_cast<std::size_t>(i)];
      if (e > 0) d.X(i, first_dummy_col + e - 1) = 1.0;
      c += sel.n_persons - 1;
    }
    if (spec.intercept) d.X(i, c++) = 1.0;
    d.y(i) = count_outcome ? static_cast<double>(r.productivity)
                           : std::log1p(static_cast<double>(r.citations));
  }
  return d;
}

struct Moments {
  double mean = 0, sd = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  if (v.size() > 1) m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return m;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - std::floor(pos);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

void emit_grid(ModelSuiteReport& report, const std::string& model_name,
               const DesignMatrix& d, const RegressionResult& fit,
               bool count_outcome, int grid_points) {
  const int idr_c = d.col("idr");
  const int field_c = d.col("field_idr");
  const int inter_c = d.col("idr_x_field");

  // Baseline row: every other regressor at its sample mean.
  Eigen::RowVectorXd base = d.X.colwise().mean();

  std::vector<double> idrs(static_cast<std::size_t>(d.X.rows()));
  std::vector<double> fields(static_cast<std::size_t>(d.X.rows()));
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
    idrs[static_cast<std::size_t>(i)] = d.X(i, idr_c);
    fields[static_cast<std::size_t>(i)] = d.X(i, field_c);
  }
  Moments fm = moments(fields);
  const double idr_lo = quantile(idrs, 0.10);
  const double idr_hi = quantile(idrs, 0.90);

  const std::vector<std::pair<std::string, double>> levels = {
      {"low", fm.mean - fm.sd}, {"mean", fm.mean}, {"high", fm.mean + fm.sd}};
  for (const auto& [tag, f] : levels) {
    for (int g = 0; g < grid_points; ++g) {
      const double idr = idr_lo + (idr_hi - idr_lo) * g /
                                      static_cast<double>(grid_points - 1);
      Eigen::RowVectorXd row = base;
      row(idr_c) = idr;
      row(field_c) = f;
      row(inter_c) = idr * f;
      const double eta = row * fit.coef;
      FigureGridRow out;
      out.model = model_name;
      out.field_level = tag;
      out.field_idr = f;
      out.idr = idr;
      out.predicted = count_outcome ? std::exp(eta) : eta;
      report.grid.push_back(out);
    }
  }
}

}  // namespace

ModelSuiteReport run_h_models(const std::vector<PersonYearRow>& rows,
                              const ModelSuiteOptions& opts) {
  ModelSuiteReport report;
  int excluded = 0;
  for (const auto& r : rows)
    if (r.excluded) ++excluded;
  report.n_rows_excluded = excluded;

  OlsOptions ols_opts;
  ols_opts.cluster_by_entity = opts.cluster_se;

  for (const auto& model : opts.models) {
    if (model == "prod_fe") {
      Rows sel = select_rows(rows, false, report.warnings);
      report.n_rows_used = static_cast<int>(sel.rows.size());
      ColumnSpec spec;
      spec.person_dummies = true;
      DesignMatrix d = build_design(sel, OutcomeKind::Count, true, spec);
      report.models.emplace_back(model, poisson_irls(d));
    } else if (model == "vis_fe") {
      Rows sel = select_rows(rows, false, report.warnings);
      report.n_rows_used = static_cast<int>(sel.rows.size());
      ColumnSpec spec;
      spec.reach = true;
      spec.log_productivity = true;
      DesignMatrix d = build_design(sel, OutcomeKind::LogContinuous, false, spec);
      DemeanResult dm = within_demean(d);
      for (const auto& name : dm.dropped)
        report.warnings.push_back("vis_fe: dropped time-invariant column '" +
                                  name + "'");
      report.models.emplace_back(model, ols(dm.design, ols_opts));
    } else if (model == "prod_x") {
      Rows sel = select_rows(rows, true, report.warnings);
      ColumnSpec spec;
      spec.interaction = true;
      DesignMatrix d = build_design(sel, OutcomeKind::Count, true, spec);
      RegressionResult fit = poisson_irls(d);
      if (opts.figure_grid) emit_grid(report, model, d, fit, true, opts.grid_points);
      report.models.emplace_back(model, std::move(fit));
    } else if (model == "vis_x") {
      Rows sel = select_rows(rows, true, report.warnings);
      ColumnSpec spec;
      spec.interaction = true;
      spec.reach = true;
      spec.log_productivity = true;
      DesignMatrix d = build_design(sel, OutcomeKind::LogContinuous, false, spec);
      RegressionResult fit = ols(d, ols_opts);
      if (opts.figure_grid) emit_grid(report, model, d, fit, false, opts.grid_points);
      report.models.emplace_back(model, std::move(fit));
    } else {
      throw DataError("unknown model '" + model + "'");
    }
  }
  return report;
}

void write_models_csv(const ModelSuiteReport& report, std::ostream& out) {
  out << "model,term,estimate,se_classical,se_hc1,n\n";
  for (const auto& [model, fit] : report.models) {
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
      // Person dummies are nuisance coefficients; keep the table readable.
      if (fit.names[i].rfind("person_", 0) == 0) continue;
      out << csv_row({model, fit.names[i],
                      fstr("%.8g", fit.coef(static_cast<Eigen::Index>(i))),
                      fstr("%.8g", fit.se_classical(static_cast<Eigen::Index>(i))),
                      fstr("%.8g", fit.se_hc1(static_cast<Eigen::Index>(i))),
                      std::to_string(fit.n_obs)});
    }
  }
}

void write_figure_grid_csv(const ModelSuiteReport& report, std::ostream& out) {
  out << "model,field_level,field_idr,idr,predicted\n";
  for (const auto& g : report.grid) {
    out << csv_row({g.model, g.field_level, fstr("%.6f", g.field_idr),
                    fstr("%.6f", g.idr), fstr("%.6f", g.predicted)});
  }
}

}  // namespace idr
