#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace idr::cli {

struct BuildMatrixArgs {
  std::filesystem::path corpus_dir;
  std::filesystem::path out_dir;
  std::vector<int> epochs;
  int window = 5;
  int jobs = 1;
  bool strict = false;
};

struct ScoreArgs {
  std::filesystem::path corpus_dir;
  std::filesystem::path out_dir;
  // Each spec is "PATH" or "YEAR=PATH"; a single unkeyed matrix serves
  // every publication year.
  std::vector<std::string> matrices;
  int jobs = 1;
  bool strict = false;
};

struct PanelArgs {
  std::filesystem::path corpus_dir;
  std::filesystem::path scores_csv;
  std::filesystem::path out_dir;
  int reference_year = 0;
  bool overlap_collab = false;  // any-pair-overlap repeat-collaboration rule
  bool strict = false;
};

struct RegressArgs {
  std::filesystem::path panel_csv;  // person-year table
  std::filesystem::path spec_file;
  std::filesystem::path out_dir;
};

struct VarianceSplitArgs {
  std::filesystem::path corpus_dir;
  std::filesystem::path scores_csv;
  std::filesystem::path out_dir;
  bool strict = false;
};

struct SimulateArgs {
  std::filesystem::path config_file;
  std::filesystem::path out_dir;
};

// Each command creates its output directory, writes its artifacts plus a
// manifest, and returns 0. Failures are reported by exception: DataError
// maps to exit code 2, NumericError to 3.
int run_build_matrix(const BuildMatrixArgs& args);
int run_score(const ScoreArgs& args);
int run_panel(const PanelArgs& args);
int run_regress(const RegressArgs& args);
int run_variance_split(const VarianceSplitArgs& args);
int run_simulate(const SimulateArgs& args);

}  // namespace idr::cli
