#include "idr/pipeline.hpp"

#include <fstream>
#include <iostream>

#include "idr/csv.hpp"
#include "idr/errors.hpp"
#include "idr/ingest.hpp"
#include "idr/kvconfig.hpp"
#include "idr/manifest.hpp"
#include "idr/metrics.hpp"
#include "idr/models.hpp"
#include "idr/panel.hpp"
#include "idr/sc_space.hpp"
#include "idr/simgen.hpp"
#include "idr/stats.hpp"
#include "idr/strutil.hpp"

namespace idr::cli {

namespace {

namespace fs = std::filesystem;

Corpus load(const fs::path& corpus_dir, bool strict, LoadReport* report = nullptr) {
  auto paths = CorpusPaths::in_dir(corpus_dir);
  LoadReport local;
  Corpus corpus = load_corpus(
      paths, strict ? Strictness::Strict : Strictness::Lenient,
      report ? report : &local);
  const LoadReport& rep = report ? *report : local;
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
  return corpus;
}

std::vector<fs::path> corpus_inputs(const fs::path& corpus_dir) {
  auto paths = CorpusPaths::in_dir(corpus_dir);
  std::vector<fs::path> inputs = {paths.papers, paths.journals};
  if (!paths.persons.empty()) inputs.push_back(paths.persons);
  if (!paths.fields.empty()) inputs.push_back(paths.fields);
  return inputs;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

MatrixRegistry load_registry(const std::vector<std::string>& specs) {
  MatrixRegistry registry;
  for (const auto& spec : specs) {
    auto eq = spec.find('=');
    int year = 0;
    fs::path path;
    if (eq == std::string::npos) {
      path = spec;
    } else {
      try {
        year = std::stoi(spec.substr(0, eq));
      } catch (const std::exception&) {
        throw DataError("matrix spec '" + spec + "' is not YEAR=PATH");
      }
      path = spec.substr(eq + 1);
    }
    if (registry.count(year))
      throw DataError("duplicate matrix epoch " + std::to_string(year));
    registry.emplace(year, load_similarity_fixture(path));
  }
  return registry;
}

}  // namespace

int run_build_matrix(const BuildMatrixArgs& args) {
  if (args.epochs.empty()) throw DataError("build-matrix: no epochs given");
  if (args.window < 1) throw DataError("build-matrix: window must be >= 1");
  Corpus corpus = load(args.corpus_dir, args.strict);
  fs::create_directories(args.out_dir);

  std::vector<CoCitationCounts> parts;
  for (int epoch : args.epochs) {
    auto [lo, hi] = epoch_window(epoch, args.window);
    CoCitationCounts counts = build_cocitation(corpus, lo, hi, args.jobs);
    save_matrix_file(counts.sc_labels, counts.counts,
                     args.out_dir / fstr("counts_%d.txt", epoch));
    SimilarityMatrix sim = to_cosine(counts);
    save_matrix_file(sim.labels(), sim.values(),
                     args.out_dir / fstr("sim_%d.txt", epoch));
    parts.push_back(std::move(counts));
  }
  CoCitationCounts pooled = sum_counts(parts);
  save_matrix_file(pooled.sc_labels, pooled.counts, args.out_dir / "counts_pooled.txt");
  SimilarityMatrix pooled_sim = to_cosine(pooled);
  save_matrix_file(pooled_sim.labels(), pooled_sim.values(),
                   args.out_dir / "sim_pooled.txt");

  std::string config = "window=" + std::to_string(args.window) + "\nepochs=";
  for (int e : args.epochs) config += std::to_string(e) + ",";
  write_manifest(args.out_dir, "build-matrix", config, corpus_inputs(args.corpus_dir),
                 {{"papers", static_cast<std::int64_t>(corpus.papers.size())},
                  {"epochs", static_cast<std::int64_t>(args.epochs.size())}});
  return 0;
}

int run_score(const ScoreArgs& args) {
  if (args.matrices.empty()) throw DataError("score: no similarity matrix given");
  Corpus corpus = load(args.corpus_dir, args.strict);
  MatrixRegistry registry = load_registry(args.matrices);
  ScoreMap scores = score_corpus(corpus, registry, args.jobs);
  fs::create_directories(args.out_dir);
  {
    auto out = open_out(args.out_dir / "scores.csv");
    write_scores_csv(scores, out);
  }

  std::int64_t undefined = 0, flagged = 0;
  for (const auto& [id, m] : scores) {
    if (!m.idr) ++undefined;
    if (!m.flags.empty()) ++flagged;
  }
  std::vector<fs::path> inputs = corpus_inputs(args.corpus_dir);
  for (const auto& spec : args.matrices) {
    auto eq = spec.find('=');
    inputs.emplace_back(eq == std::string::npos ? spec : spec.substr(eq + 1));
  }
  std::string config;
  for (const auto& m : args.matrices) config += m + "\n";
  write_manifest(args.out_dir, "score", config, inputs,
                 {{"papers", static_cast<std::int64_t>(scores.size())},
                  {"undefined_idr", undefined},
                  {"flagged", flagged}});
  return 0;
}

int run_panel(const PanelArgs& args) {
  Corpus corpus = load(args.corpus_dir, args.strict);
  std::ifstream scores_in(args.scores_csv);
  if (!scores_in) throw DataError("cannot open " + args.scores_csv.string());
  ScoreMap scores = read_scores_csv(scores_in);

  PanelOptions opts;
  opts.reference_year = args.reference_year;
  opts.collab_rule =
      args.overlap_collab ? CollabRule::AnyPairOverlap : CollabRule::ExactSet;

  std::vector<PersonRow> persons = build_person(corpus, scores, nullptr, opts);
  std::vector<FieldIdr> fids = field_idr_means(persons, corpus);
  apply_field_idr(persons, fids, corpus);
  std::vector<PersonYearRow> years = build_person_year(corpus, scores, fids, opts);

  fs::create_directories(args.out_dir);
  {
    auto out = open_out(args.out_dir / "panel_person.csv");
    write_person_csv(persons, out);
  }
  {
    auto out = open_out(args.out_dir / "panel_person_year.csv");
    write_person_year_csv(years, out);
  }
  {
    auto out = open_out(args.out_dir / "field_idr.csv");
    out << "field_id,mean_idr,n_members\n";
    for (const auto& f : fids) {
      out << csv_row({f.field_id, f.mean_idr ? fstr("%.6f", *f.mean_idr) : "",
                      std::to_string(f.n_members)});
    }
  }

  std::int64_t excluded = 0;
  for (const auto& r : years)
    if (r.excluded) ++excluded;
  std::vector<fs::path> inputs = corpus_inputs(args.corpus_dir);
  inputs.push_back(args.scores_csv);
  write_manifest(args.out_dir, "panel",
                 fstr("reference_year=%d\noverlap_collab=%d\n",
                      args.reference_year, args.overlap_collab ? 1 : 0),
                 inputs,
                 {{"persons", static_cast<std::int64_t>(persons.size())},
                  {"person_years", static_cast<std::int64_t>(years.size())},
                  {"excluded_zero_idr_rows", excluded}});
  return 0;
}

int run_regress(const RegressArgs& args) {
  std::ifstream panel_in(args.panel_csv);
  if (!panel_in) throw DataError("cannot open " + args.panel_csv.string());
  std::vector<PersonYearRow> rows = read_person_year_csv(panel_in);

  KvConfig kv = KvConfig::parse_file(args.spec_file);
  ModelSuiteOptions opts;
  if (kv.has("models")) opts.models = kv.get_list("models");
  opts.figure_grid = kv.get_bool("figure_grid", true);
  opts.cluster_se = kv.get_bool("cluster_se", false);
  opts.grid_points = static_cast<int>(kv.get_int("grid_points", opts.grid_points));
  for (const auto& [key, value] : kv.entries()) {
    if (key != "models" && key != "figure_grid" && key != "cluster_se" &&
        key != "grid_points")
      throw DataError("regress spec: unknown key '" + key + "'");
  }

  ModelSuiteReport report = run_h_models(rows, opts);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';

  fs::create_directories(args.out_dir);
  {
    auto out = open_out(args.out_dir / "models.csv");
    write_models_csv(report, out);
  }
  if (opts.figure_grid && !report.grid.empty()) {
    auto out = open_out(args.out_dir / "figure_grid.csv");
    write_figure_grid_csv(report, out);
  }
  write_manifest(args.out_dir, "regress", kv.canonical(),
                 {args.panel_csv, args.spec_file},
                 {{"rows_used", report.n_rows_used},
                  {"rows_excluded", report.n_rows_excluded},
                  {"models", static_cast<std::int64_t>(report.models.size())}});
  return 0;
}

int run_variance_split(const VarianceSplitArgs& args) {
  Corpus corpus = load(args.corpus_dir, args.strict);
  std::ifstream scores_in(args.scores_csv);
  if (!scores_in) throw DataError("cannot open " + args.scores_csv.string());
  ScoreMap scores = read_scores_csv(scores_in);

  SplitReport report = median_split_variance(corpus, scores);
  fs::create_directories(args.out_dir);
  {
    auto out = open_out(args.out_dir / "variance_split.csv");
    write_split_csv(report, out);
  }
  {
    auto out = open_out(args.out_dir / "variance_summary.csv");
    out << "n_persons,median_idr,mean_sd_low,mean_sd_high,paired_t,paired_df,paired_p\n";
    if (report.paired_diffs.size() >= 2) {
      TTest test = paired_ttest(report.paired_diffs);
      out << csv_row({std::to_string(report.persons.size()),
                      fstr("%.6f", report.median_idr),
                      fstr("%.6f", report.mean_sd_low),
                      fstr("%.6f", report.mean_sd_high), fstr("%.6f", test.t),
                      fstr("%.6f", test.df), fstr("%.6g", test.p)});
    } else {
      out << csv_row({std::to_string(report.persons.size()),
                      fstr("%.6f", report.median_idr),
                      fstr("%.6f", report.mean_sd_low),
                      fstr("%.6f", report.mean_sd_high), "", "", ""});
    }
  }
  std::vector<fs::path> inputs = corpus_inputs(args.corpus_dir);
  inputs.push_back(args.scores_csv);
  write_manifest(args.out_dir, "variance-split", "", inputs,
                 {{"qualifying_persons",
                   static_cast<std::int64_t>(report.persons.size())},
                  {"scored_papers", report.n_scored_papers}});
  return 0;
}

int run_simulate(const SimulateArgs& args) {
  KvConfig kv = KvConfig::parse_file(args.config_file);
  SimConfig config = SimConfig::from_kv(kv);
  GenerateResult result = generate(config);
  write_generated(result, args.out_dir);
  write_manifest(args.out_dir, "simulate", config.to_kv_string(),
                 {args.config_file},
                 {{"papers", static_cast<std::int64_t>(result.corpus.papers.size())},
                  {"persons", static_cast<std::int64_t>(result.corpus.persons.size())}});
  return 0;
}

}  // namespace idr::cli
