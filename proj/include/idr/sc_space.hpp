#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "idr/corpus.hpp"

namespace idr {

// Symmetric SCxSC co-citation counts for one epoch window. Entry (i,j) is
// the number of papers whose reference list touches both SC i and SC j;
// the diagonal counts papers referencing SC i at all.
struct CoCitationCounts {
  std::vector<std::string> sc_labels;
  Eigen::MatrixXd counts;
  std::string epoch;

  int dim() const { return static_cast<int>(counts.rows()); }
};

enum class SimProvenance { CosineOfCounts, Fixture };

// Symmetric SCxSC similarity with unit diagonal and entries in [0,1],
// indexed by its own label list (aligned to a corpus catalog by label).
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::vector<std::string> labels, Eigen::MatrixXd s,
                   std::string epoch, SimProvenance provenance);

  int dim() const { return static_cast<int>(s_.rows()); }
  double at(int i, int j) const { return s_(i, j); }
  std::optional<int> index_of(std::string_view label) const;
  const std::vector<std::string>& labels() const { return labels_; }
  const Eigen::MatrixXd& values() const { return s_; }
  const std::string& epoch() const { return epoch_; }
  SimProvenance provenance() const { return provenance_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
  Eigen::MatrixXd s_;
  std::string epoch_;
  SimProvenance provenance_ = SimProvenance::Fixture;
};

// Default epoch window: the five years preceding the epoch year.
std::pair<int, int> epoch_window(int epoch_year, int window_len = 5);

// Counts unordered SC pairs (including i=j) over the set of SCs each
// in-window paper references. Multiple references to one SC count once.
// `jobs` > 1 folds papers in parallel; the result is order-independent.
CoCitationCounts build_cocitation(const Corpus& corpus, int year_lo,
                                  int year_hi, int jobs = 1);

CoCitationCounts sum_counts(const std::vector<CoCitationCounts>& parts);

// Salton cosine over columns of the count matrix; diagonal forced to 1;
// an all-zero column yields 0 off-diagonal.
SimilarityMatrix to_cosine(const CoCitationCounts& counts);

// Epoch year -> similarity matrix.
using MatrixRegistry = std::map<int, SimilarityMatrix>;

// Matrix whose epoch year is closest to the publication year; ties go to
// the earlier epoch. Throws DataError on an empty registry.
const SimilarityMatrix& select_epoch_matrix(const MatrixRegistry& registry,
                                            int publication_year);

// Matrix text format: "K <dim>", one "sc <index> <label>" line per SC,
// then "<i> <j> <value>" triplets for the upper triangle including the
// diagonal, row-major, zeros omitted, values with 12 significant digits.
void save_matrix_file(const std::vector<std::string>& labels,
                      const Eigen::MatrixXd& m,
                      const std::filesystem::path& path);

// Loads and validates a similarity fixture: entries in [0,1], unit
// diagonal, asymmetry beyond 1e-12 rejected.
SimilarityMatrix load_similarity_fixture(const std::filesystem::path& path);

CoCitationCounts load_counts_file(const std::filesystem::path& path);

}  // namespace idr
