#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "idr/panel.hpp"
#include "idr/stats.hpp"

namespace idr {

// The four person-year model specifications:
//   prod_fe  Poisson productivity with person fixed effects (dummies)
//   vis_fe   log-visibility with the within-person transformation
//   prod_x   pooled Poisson productivity with IDR x field-IDR interaction
//   vis_x    pooled log-visibility with the interaction
struct ModelSuiteOptions {
  std::vector<std::string> models = {"prod_fe", "vis_fe", "prod_x", "vis_x"};
  bool figure_grid = true;
  bool cluster_se = false;
  int grid_points = 11;
};

struct FigureGridRow {
  std::string model;
  std::string field_level;  // "low" | "mean" | "high"
  double field_idr = 0;
  double idr = 0;
  double predicted = 0;
};

struct ModelSuiteReport {
  std::vector<std::pair<std::string, RegressionResult>> models;
  std::vector<FigureGridRow> grid;
  int n_rows_used = 0;
  int n_rows_excluded = 0;
  std::vector<std::string> warnings;

  const RegressionResult& result(std::string_view model) const;
};

// Drops excluded rows (zero or undefined mean IDR), builds the designs,
// fits every requested model, and emits predicted-value grids for the
// interaction models at field IDR = mean - sd, mean, mean + sd.
ModelSuiteReport run_h_models(const std::vector<PersonYearRow>& rows,
                              const ModelSuiteOptions& opts = {});

// models.csv: model,term,estimate,se_classical,se_hc1,n
void write_models_csv(const ModelSuiteReport& report, std::ostream& out);
// figure_grid.csv: model,field_level,field_idr,idr,predicted
void write_figure_grid_csv(const ModelSuiteReport& report, std::ostream& out);

}  // namespace idr
