#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "idr/corpus.hpp"
#include "idr/sc_space.hpp"

namespace idr {

// Normalized reference weights over subject categories. Every present
// weight is > 0 and the weights sum to 1 (each reference carries one unit,
// split equally across its journal's SCs).
struct RefProportions {
  std::vector<std::pair<ScId, double>> weights;  // sorted by ScId
  int total_refs = 0;

  int distinct_scs() const { return static_cast<int>(weights.size()); }
};

// nullopt when the paper has no resolvable references (undefined, never 0).
std::optional<RefProportions> ref_proportions(const PaperRecord& paper);

// Integration score 1 - sum over unordered SC pairs (i<=j, counted once)
// of s_ij * p_i * p_j. Sparse over the SCs actually referenced.
// Throws DataError when a referenced SC is missing from the matrix.
double paper_idr(const RefProportions& props, const SimilarityMatrix& sim,
                 const ScCatalog& catalog);

// Number of SCs classifying the focal paper itself. Throws DataError when
// the paper carries no focal SCs.
int reach(const PaperRecord& paper);

// Count of distinct SCs referenced across a set of papers (0 if none).
int variety(const std::vector<const PaperRecord*>& papers);

// IDR of the pooled reference list of an oeuvre: working across fields
// scores high here even when every single paper is mono-disciplinary.
std::optional<double> multidisciplinarity(
    const std::vector<const PaperRecord*>& papers, const SimilarityMatrix& sim,
    const ScCatalog& catalog);

struct PaperMetrics {
  std::string paper_id;
  int year = 0;
  std::optional<double> idr;  // undefined without references
  int reach = 0;              // 0 when the paper has no focal SCs (flagged)
  int ref_count = 0;
  int distinct_ref_scs = 0;
  std::vector<std::string> flags;
};

using ScoreMap = std::map<std::string, PaperMetrics>;

// Scores every paper against the epoch matrix closest to its year.
// Per-paper problems become flags; the batch never aborts.
ScoreMap score_corpus(const Corpus& corpus, const MatrixRegistry& registry,
                      int jobs = 1);

// scores.csv: paper_id,year,idr,reach,ref_count,distinct_ref_scs with IDR
// printed to 6 decimals and an empty field when undefined.
void write_scores_csv(const ScoreMap& scores, std::ostream& out);
ScoreMap read_scores_csv(std::istream& in);

}  // namespace idr
