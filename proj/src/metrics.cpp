#include "idr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include "idr/csv.hpp"
#include "idr/errors.hpp"
#include "idr/strutil.hpp"

namespace idr {

std::optional<RefProportions> ref_proportions(const PaperRecord& paper) {
  if (paper.ref_scs.empty()) return std::nullopt;
  std::map<ScId, double> acc;
  for (const auto& ref : paper.ref_scs) {
    // One reference carries one unit of weight, split equally when its
    // journal has several SCs.
    const double share = 1.0 / static_cast<double>(ref.size());
    for (ScId sc : ref) acc[sc] += share;
  }
  RefProportions out;
  out.total_refs = paper.ref_count();
  const double total = static_cast<double>(out.total_refs);
  out.weights.reserve(acc.size());
  for (const auto& [sc, w] : acc) out.weights.emplace_back(sc, w / total);
  return out;
}

double paper_idr(const RefProportions& props, const SimilarityMatrix& sim,
                 const ScCatalog& catalog) {
  // Resolve catalog ids to matrix rows by label once.
  std::vector<std::pair<int, double>> rows;
  rows.reserve(props.weights.size());
  for (const auto& [sc, p] : props.weights) {
    const std::string& label = catalog.label(sc);
    auto idx = sim.index_of(label);
    if (!idx)
      throw DataError("subject category '" + label +
                      "' missing from similarity matrix");
    rows.emplace_back(*idx, p);
  }
  // Unordered pairs counted once, diagonal included.
  double total = 0.0;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a; b < rows.size(); ++b) {
      total += sim.at(rows[a].first, rows[b].first) * rows[a].second * rows[b].second;
    }
  }
  return 1.0 - total;
}

int reach(const PaperRecord& paper) {
  if (paper.focal_scs.empty())
    throw DataError("paper '" + paper.paper_id + "' has no focal subject categories");
  return static_cast<int>(paper.focal_scs.size());
}

int variety(const std::vector<const PaperRecord*>& papers) {
  std::set<ScId> seen;
  for (const auto* paper : papers)
    for (const auto& ref : paper->ref_scs)
      for (ScId sc : ref) seen.insert(sc);
  return static_cast<int>(seen.size());
}

std::optional<double> multidisciplinarity(
    const std::vector<const PaperRecord*>& papers, const SimilarityMatrix& sim,
    const ScCatalog& catalog) {
  // Pool every reference across the oeuvre into one synthetic paper.
  PaperRecord pooled;
  for (const auto* paper : papers)
    pooled.ref_scs.insert(pooled.ref_scs.end(), paper->ref_scs.begin(),
                          paper->ref_scs.end());
  auto props = ref_proportions(pooled);
  if (!props) return std::nullopt;
  return paper_idr(*props, sim, catalog);
}

namespace {

PaperMetrics score_one(const PaperRecord& paper, const MatrixRegistry& registry,
                       const ScCatalog& catalog) {
  PaperMetrics m;
  m.paper_id = paper.paper_id;
  m.year = paper.year;
  m.ref_count = paper.ref_count();
  if (paper.focal_scs.empty()) {
    m.flags.push_back("empty-focal");
  } else {
    m.reach = static_cast<int>(paper.focal_scs.size());
  }
  auto props = ref_proportions(paper);
  if (!props) {
    m.flags.push_back("no-references");
    return m;
  }
  m.distinct_ref_scs = props->distinct_scs();
  try {
    m.idr = paper_idr(*props, select_epoch_matrix(registry, paper.year), catalog);
  } catch (const DataError& e) {
    m.flags.push_back(std::string("score-error: ") + e.what());
  }
  return m;
}

}  // namespace

ScoreMap score_corpus(const Corpus& corpus, const MatrixRegistry& registry,
                      int jobs) {
  if (registry.empty()) throw DataError("no similarity matrices registered");
  const std::size_t n = corpus.papers.size();
  std::vector<PaperMetrics> rows(n);
  jobs = std::max(1, jobs);
  if (jobs == 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i)
      rows[i] = score_one(corpus.papers[i], registry, corpus.catalog);
  } else {
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < n;
             i += static_cast<std::size_t>(jobs))
          rows[i] = score_one(corpus.papers[i], registry, corpus.catalog);
      });
    }
    for (auto& t : workers) t.join();
  }
  ScoreMap out;
  for (auto& m : rows) {
    std::string key = m.paper_id;
    out.emplace(std::move(key), std::move(m));
  }
  return out;
}

void write_scores_csv(const ScoreMap& scores, std::ostream& out) {
  out << "paper_id,year,idr,reach,ref_count,distinct_ref_scs\n";
  for (const auto& [id, m] : scores) {
    out << csv_row({id, std::to_string(m.year),
                    m.idr ? fstr("%.6f", *m.idr) : std::string(),
                    std::to_string(m.reach), std::to_string(m.ref_count),
                    std::to_string(m.distinct_ref_scs)});
  }
}

ScoreMap read_scores_csv(std::istream& in) {
  auto header = csv_read_row(in);
  const std::vector<std::string> expected = {
      "paper_id", "year", "idr", "reach", "ref_count", "distinct_ref_scs"};
  if (!header || *header != expected)
    throw DataError("scores csv: unexpected header");
  ScoreMap out;
  while (auto row = csv_read_row(in)) {
    if (row->size() != expected.size())
      throw DataError("scores csv: wrong field count in row");
    PaperMetrics m;
    m.paper_id = (*row)[0];
    m.year = std::stoi((*row)[1]);
    if (!(*row)[2].empty()) m.idr = std::stod((*row)[2]);
    m.reach = std::stoi((*row)[3]);
    m.ref_count = std::stoi((*row)[4]);
    m.distinct_ref_scs = std::stoi((*row)[5]);
    if (!out.emplace(m.paper_id, m).second)
      throw DataError("scores csv: duplicate paper_id '" + m.paper_id + "'");
  }
  return out;
}

}  // namespace idr
