#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "idr/errors.hpp"
#include "idr/manifest.hpp"
#include "idr/pipeline.hpp"
#include "idr/strutil.hpp"

namespace {

std::vector<int> parse_epochs(const std::string& csv) {
  std::vector<int> out;
  for (const auto& part : idr::split(csv, ',')) {
    auto t = idr::trim(part);
    if (t.empty()) continue;
    try {
      out.push_back(std::stoi(std::string(t)));
    } catch (const std::exception&) {
      throw idr::DataError("invalid epoch year '" + std::string(t) + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interdisciplinarity scoring and panel analysis toolkit"};
  app.set_version_flag("--version", std::string(idr::kToolVersion));
  app.require_subcommand(1);

  idr::cli::BuildMatrixArgs bm;
  std::string bm_epochs;
  auto* build = app.add_subcommand(
      "build-matrix", "Build SCxSC co-citation and cosine similarity matrices");
  build->add_option("--corpus", bm.corpus_dir,
                    "Corpus directory (papers.jsonl, journals.jsonl, ...)")
      ->required();
  build->add_option("--epochs", bm_epochs,
                    "Comma-separated epoch years, e.g. 1987,1997,2007")
      ->required();
  build->add_option("--window", bm.window,
                    "Years preceding each epoch to count (default 5)");
  build->add_option("--out", bm.out_dir, "Output directory")->required();
  build->add_option("--jobs", bm.jobs, "Worker threads for matrix building");
  build->add_flag("--strict", bm.strict, "Abort on unresolvable references");

  idr::cli::ScoreArgs sc;
  auto* score = app.add_subcommand("score", "Score every paper's IDR");
  score->add_option("--corpus", sc.corpus_dir, "Corpus directory")->required();
  score
      ->add_option("--matrix", sc.matrices,
                   "Similarity matrix file, PATH or YEAR=PATH (repeatable)")
      ->required();
  score->add_option("--out", sc.out_dir, "Output directory for scores.csv")
      ->required();
  score->add_option("--jobs", sc.jobs, "Worker threads for scoring");
  score->add_flag("--strict", sc.strict, "Abort on unresolvable references");

  idr::cli::PanelArgs pn;
  auto* panel = app.add_subcommand(
      "panel", "Assemble person and person-year observation tables");
  panel->add_option("--corpus", pn.corpus_dir, "Corpus directory")->required();
  panel->add_option("--scores", pn.scores_csv, "scores.csv from the score step")
      ->required();
  panel->add_option("--out-dir", pn.out_dir, "Output directory")->required();
  panel->add_option("--ref-year", pn.reference_year,
                    "Reference year for professional age (default: corpus max)");
  panel->add_flag("--overlap-collab", pn.overlap_collab,
                  "Count any prior coauthor pair as a repeat collaboration");
  panel->add_flag("--strict", pn.strict, "Abort on unresolvable references");

  idr::cli::RegressArgs rg;
  auto* regress =
      app.add_subcommand("regress", "Fit the person-year regression suite");
  regress->add_option("--panel", rg.panel_csv, "panel_person_year.csv")
      ->required();
  regress->add_option("--spec", rg.spec_file, "Model spec (key = value lines)")
      ->required();
  regress->add_option("--out", rg.out_dir, "Output directory")->required();

  idr::cli::VarianceSplitArgs vs;
  auto* split = app.add_subcommand(
      "variance-split", "Median-split citation variance comparison");
  split->add_option("--corpus", vs.corpus_dir, "Corpus directory")->required();
  split->add_option("--scores", vs.scores_csv, "scores.csv from the score step")
      ->required();
  split->add_option("--out", vs.out_dir, "Output directory")->required();
  split->add_flag("--strict", vs.strict, "Abort on unresolvable references");

  idr::cli::SimulateArgs sm;
  auto* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic corpus with planted effects");
  simulate
      ->add_option("--config", sm.config_file,
                   "Generator config (key = value lines; seed is mandatory)")
      ->required();
  simulate->add_option("--out-dir", sm.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Exit 0 for --help/--version, 1 for every usage error.
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (build->parsed()) {
      bm.epochs = parse_epochs(bm_epochs);
      return idr::cli::run_build_matrix(bm);
    }
    if (score->parsed()) return idr::cli::run_score(sc);
    if (panel->parsed()) return idr::cli::run_panel(pn);
    if (regress->parsed()) return idr::cli::run_regress(rg);
    if (split->parsed()) return idr::cli::run_variance_split(vs);
    if (simulate->parsed()) return idr::cli::run_simulate(sm);
  } catch (const idr::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const idr::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
