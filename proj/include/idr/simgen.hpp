#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "idr/corpus.hpp"
#include "idr/kvconfig.hpp"
#include "idr/sc_space.hpp"

namespace idr {

// Synthetic-corpus generator configuration. Effects are planted on the
// latent per-person-year IDR level x:
//   papers/year   ~ Poisson(exp(base_pubs_log + beta_idr_productivity*x
//                              + beta_idr_x_field*x*field_idr + period drift))
//   citations     ~ Poisson(exp(base_cites_log + beta_idr_citation_mean*idr
//                              + beta_cite_x_field*idr*field_idr + u)),
//                   u ~ Normal(-s^2/2, s), s = sigma0 + gamma*idr
struct SimConfig {
  std::uint64_t seed = 0;  // mandatory
  int n_persons = 100;
  int n_fields = 5;
  int year_lo = 1986;
  int year_hi = 2005;
  int sc_count = 40;
  int refs_per_paper = 24;
  double field_idr_lo = 0.35;
  double field_idr_hi = 0.65;
  double person_idr_sd = 0.10;
  double within_person_idr_sd = 0.08;
  double beta_idr_productivity = -0.25;
  double beta_idr_citation_mean = 0.45;
  double gamma_idr_citation_dispersion = 0.0;
  double beta_idr_x_field = 0.0;
  double beta_cite_x_field = 0.0;
  double base_pubs_log = 1.1;
  double base_cites_log = 2.2;
  double sigma0_dispersion = 0.05;
  double repeat_team_rate = 0.35;
  double period_drift = 0.02;  // log-rate drift per 5-year bucket
  double within_block_s = 0.75;
  double adjacent_block_s = 0.30;

  void validate() const;  // throws DataError
  static SimConfig from_kv(const KvConfig& kv);
  std::string to_kv_string() const;
};

struct GenerateResult {
  Corpus corpus;
  SimilarityMatrix similarity;  // the true s the targets were planted under
  std::string ground_truth_json;
  double realized_mean_idr = 0;  // over generated papers, under `similarity`
};

// Deterministic in `seed`: per-person substreams make output independent of
// generation order. Throws DataError when a configured IDR level is not
// achievable under the block similarity structure.
GenerateResult generate(const SimConfig& config);

// A reference SC multiset of size n_refs whose IDR is within 0.02 of
// target: searched over two-SC mixtures first, then three-SC splits.
// Throws DataError when the target is unreachable.
std::vector<ScId> target_idr_mix(double target, const SimilarityMatrix& sim,
                                 int n_refs);

// Block similarity used by the generator: `blocks` equal groups over K SCs,
// within_s inside a block, adjacent_s between neighboring blocks, 0 beyond.
SimilarityMatrix block_similarity(int sc_count, int blocks, double within_s,
                                  double adjacent_s);

// Writes papers/journals/persons/fields JSONL, similarity.txt and
// ground_truth.json into out_dir.
void write_generated(const GenerateResult& result,
                     const std::filesystem::path& out_dir);

}  // namespace idr
