#include "idr/sc_space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "idr/errors.hpp"
#include "idr/strutil.hpp"

namespace idr {

SimilarityMatrix::SimilarityMatrix(std::vector<std::string> labels,
                                   Eigen::MatrixXd s, std::string epoch,
                                   SimProvenance provenance)
    : labels_(std::move(labels)),
      s_(std::move(s)),
      epoch_(std::move(epoch)),
      provenance_(provenance) {
  if (s_.rows() != s_.cols() ||
      static_cast<std::size_t>(s_.rows()) != labels_.size())
    throw DataError("similarity matrix shape does not match its label list");
  for (int i = 0; i < dim(); ++i) index_.emplace(labels_[i], i);
}

std::optional<int> SimilarityMatrix::index_of(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::pair<int, int> epoch_window(int epoch_year, int window_len) {
  return {epoch_year - window_len, epoch_year - 1};
}

namespace {

// SC set referenced by one paper (union over its references).
std::vector<int> referenced_set(const PaperRecord& paper) {
  std::set<int> scs;
  for (const auto& ref : paper.ref_scs)
    for (ScId sc : ref) scs.insert(sc);
  return {scs.begin(), scs.end()};
}

void accumulate_pairs(Eigen::MatrixXd& counts, const std::vector<int>& scs) {
  for (std::size_t a = 0; a < scs.size(); ++a) {
    for (std::size_t b = a; b < scs.size(); ++b) {
      counts(scs[a], scs[b]) += 1.0;
      if (scs[a] != scs[b]) counts(scs[b], scs[a]) += 1.0;
    }
  }
}

}  // namespace

CoCitationCounts build_cocitation(const Corpus& corpus, int year_lo,
                                  int year_hi, int jobs) {
  const int k = static_cast<int>(corpus.catalog.size());
  if (k == 0) throw DataError("cannot build a co-citation matrix: empty SC catalog");
  if (year_lo > year_hi)
    throw DataError("co-citation window is empty: " + std::to_string(year_lo) +
                    " > " + std::to_string(year_hi));

  CoCitationCounts out;
  out.sc_labels = corpus.catalog.labels();
  out.epoch = std::to_string(year_lo) + "-" + std::to_string(year_hi);
  out.counts = Eigen::MatrixXd::Zero(k, k);

  jobs = std::max(1, jobs);
  if (jobs == 1 || corpus.papers.size() < 64) {
    for (const auto& paper : corpus.papers) {
      if (paper.year < year_lo || paper.year > year_hi) continue;
      accumulate_pairs(out.counts, referenced_set(paper));
    }
    return out;
  }

  // Parallel fold: private accumulators merged by elementwise addition.
  std::vector<Eigen::MatrixXd> partial(
      static_cast<std::size_t>(jobs), Eigen::MatrixXd::Zero(k, k));
  std::vector<std::thread> workers;
  const std::size_t n = corpus.papers.size();
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = static_cast<std::size_t>(w); i < n;
           i += static_cast<std::size_t>(jobs)) {
        const auto& paper = corpus.papers[i];
        if (paper.year < year_lo || paper.year > year_hi) continue;
        accumulate_pairs(partial[static_cast<std::size_t>(w)],
                         referenced_set(paper));
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& m : partial) out.counts += m;
  return out;
}

CoCitationCounts sum_counts(const std::vector<CoCitationCounts>& parts) {
  if (parts.empty()) throw DataError("sum_counts: nothing to sum");
  CoCitationCounts out;
  out.sc_labels = parts.front().sc_labels;
  out.counts = parts.front().counts;
  out.epoch = parts.front().epoch;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i].counts.rows() != out.counts.rows())
      throw DataError("sum_counts: dimension mismatch (" +
                      std::to_string(parts[i].counts.rows()) + " vs " +
                      std::to_string(out.counts.rows()) + ")");
    out.counts += parts[i].counts;
    out.epoch += "+" + parts[i].epoch;
  }
  return out;
}

SimilarityMatrix to_cosine(const CoCitationCounts& counts) {
  const int k = counts.dim();
  const Eigen::MatrixXd& c = counts.counts;
  Eigen::VectorXd norms(k);
  for (int i = 0; i < k; ++i) norms(i) = c.col(i).norm();

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (norms(i) == 0.0 || norms(j) == 0.0) continue;
      double v = c.col(i).dot(c.col(j)) / (norms(i) * norms(j));
      v = std::clamp(v, 0.0, 1.0);
      s(i, j) = v;
      s(j, i) = v;
    }
    s(i, i) = 1.0;
  }
  return SimilarityMatrix(counts.sc_labels, std::move(s), counts.epoch,
                          SimProvenance::CosineOfCounts);
}

const SimilarityMatrix& select_epoch_matrix(const MatrixRegistry& registry,
                                            int publication_year) {
  if (registry.empty())
    throw DataError("no similarity matrices registered");
  const SimilarityMatrix* best = nullptr;
  long best_dist = 0;
  for (const auto& [epoch, matrix] : registry) {
    long dist = std::labs(static_cast<long>(epoch) - publication_year);
    // Map iteration is in ascending epoch order, so strict inequality
    // breaks ties toward the earlier epoch.
    if (!best || dist < best_dist) {
      best = &matrix;
      best_dist = dist;
    }
  }
  return *best;
}

void save_matrix_file(const std::vector<std::string>& labels,
                      const Eigen::MatrixXd& m,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const int k = static_cast<int>(m.rows());
  out << "K " << k << '\n';
  for (int i = 0; i < k; ++i) out << "sc " << i << ' ' << labels[i] << '\n';
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      if (m(i, j) == 0.0) continue;
      out << i << ' ' << j << ' ' << fstr("%.12g", m(i, j)) << '\n';
    }
  }
}

namespace {

struct MatrixFile {
  std::vector<std::string> labels;
  Eigen::MatrixXd m;
  std::vector<std::vector<bool>> given;
};

MatrixFile read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open matrix file: " + path.string());
  std::string word;
  if (!(in >> word) || word != "K")
    throw DataError(path.string() + ": expected 'K <dim>' header");
  int k = 0;
  if (!(in >> k) || k <= 0)
    throw DataError(path.string() + ": invalid dimension");

  MatrixFile f;
  f.labels.assign(static_cast<std::size_t>(k), "");
  f.m = Eigen::MatrixXd::Zero(k, k);
  f.given.assign(static_cast<std::size_t>(k),
                 std::vector<bool>(static_cast<std::size_t>(k), false));

  std::set<std::string> seen;
  std::set<int> seen_idx;
  for (int n = 0; n < k; ++n) {
    int idx = 0;
    if (!(in >> word >> idx) || word != "sc")
      throw DataError(path.string() + ": expected 'sc <index> <label>' line");
    std::string rest;
    std::getline(in, rest);
    std::string label(trim(rest));
    if (label.empty())
      throw DataError(path.string() + ": sc line " + std::to_string(idx) +
                      " has an empty label");
    if (idx < 0 || idx >= k)
      throw DataError(path.string() + ": sc index out of range");
    if (!seen_idx.insert(idx).second)
      throw DataError(path.string() + ": duplicate sc index " + std::to_string(idx));
    if (!seen.insert(label).second)
      throw DataError(path.string() + ": duplicate sc label '" + label + "'");
    f.labels[static_cast<std::size_t>(idx)] = label;
  }

  int i = 0, j = 0;
  double v = 0;
  while (in >> i >> j >> v) {
    if (i < 0 || j < 0 || i >= k || j >= k)
      throw DataError(path.string() + ": triplet index out of range");
    auto ia = static_cast<std::size_t>(std::min(i, j));
    auto jb = static_cast<std::size_t>(std::max(i, j));
    if (f.given[ia][jb] && std::abs(f.m(std::min(i, j), std::max(i, j)) - v) > 1e-12)
      throw DataError(path.string() + ": asymmetric entries at (" +
                      std::to_string(i) + "," + std::to_string(j) + ")");
    f.given[ia][jb] = true;
    f.m(i, j) = v;
    f.m(j, i) = v;
  }
  if (!in.eof()) throw DataError(path.string() + ": malformed triplet line");
  return f;
}

}  // namespace

SimilarityMatrix load_similarity_fixture(const std::filesystem::path& path) {
  MatrixFile f = read_matrix_file(path);
  const int k = static_cast<int>(f.m.rows());
  for (int i = 0; i < k; ++i) {
    if (std::abs(f.m(i, i) - 1.0) > 1e-12)
      throw DataError(path.string() + ": diagonal entry " + std::to_string(i) +
                      " is not 1");
    for (int j = i; j < k; ++j) {
      double v = f.m(i, j);
      if (v < 0.0 || v > 1.0)
        throw DataError(path.string() + ": entry (" + std::to_string(i) + "," +
                        std::to_string(j) + ") = " + fstr("%g", v) +
                        " outside [0,1]");
    }
  }
  return SimilarityMatrix(std::move(f.labels), std::move(f.m),
                          path.stem().string(), SimProvenance::Fixture);
}

CoCitationCounts load_counts_file(const std::filesystem::path& path) {
  MatrixFile f = read_matrix_file(path);
  for (int i = 0; i < f.m.rows(); ++i)
    for (int j = 0; j < f.m.cols(); ++j)
      if (f.m(i, j) < 0)
        throw DataError(path.string() + ": negative co-citation count");
  CoCitationCounts out;
  out.sc_labels = std::move(f.labels);
  out.counts = std::move(f.m);
  out.epoch = path.stem().string();
  return out;
}

}  // namespace idr
