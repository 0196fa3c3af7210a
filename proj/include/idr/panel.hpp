#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "idr/corpus.hpp"
#include "idr/metrics.hpp"

namespace idr {

enum class CollabRule { ExactSet, AnyPairOverlap };

struct PanelOptions {
  // 0 means "use the corpus max year". Professional age is measured
  // against this year at the person level and against the row year at the
  // person-year level.
  int reference_year = 0;
  CollabRule collab_rule = CollabRule::ExactSet;
};

struct PersonYearRow {
  std::string person_id;
  int year = 0;
  std::string period;  // 5-year bucket label, e.g. "1985-89"
  int productivity = 0;
  double weighted_productivity = 0;
  std::int64_t citations = 0;
  std::optional<double> mean_idr;  // over that year's papers with defined IDR
  double mean_authors = 0;
  double mean_jif = 0;  // over papers whose journal has a known JIF; 0 if none
  double repeat_collab_share = 0;
  double mean_reach = 0;
  int lag_cum_pubs = 0;          // strictly earlier years only
  double lag_cum_cites_log = 0;  // ln(1 + citations of earlier years)
  int professional_age = 0;      // year - phd_year (imputed when missing)
  bool age_imputed = false;
  std::optional<double> field_idr;
  bool excluded = false;  // mean_idr undefined or zero
};

struct PersonRow {
  std::string person_id;
  std::string field_id;
  int total_pubs = 0;
  double total_pubs_weighted = 0;
  std::int64_t total_citations = 0;
  std::optional<double> mean_idr;
  std::optional<double> sd_citations;  // needs >= 2 papers
  int variety = 0;
  std::optional<double> multidisciplinarity;
  double mean_jif = 0;
  int professional_age = 0;
  bool age_imputed = false;
  std::optional<double> field_idr;
  std::optional<int> female;
  std::optional<double> phd_rank;
  std::optional<double> status;
  int papers_scored = 0;    // papers with defined IDR
  int papers_unscored = 0;  // papers excluded from mean_idr
};

struct FieldIdr {
  std::string field_id;
  std::optional<double> mean_idr;  // undefined when no member has one
  int n_members = 0;
};

double coauthor_weighted_count(const std::vector<const PaperRecord*>& papers);

// True iff some paper earlier in (year, paper_id) order was published by
// the same author combination. ExactSet matches the whole set;
// AnyPairOverlap matches any coauthor pair seen before.
bool repeat_collaboration(const PaperRecord& paper,
                          const std::vector<const PaperRecord*>& history,
                          CollabRule rule = CollabRule::ExactSet);

// Needs a similarity matrix only for the multidisciplinarity column
// (person-level analyses use one pooled matrix); pass nullptr to skip it.
std::vector<PersonRow> build_person(const Corpus& corpus,
                                    const ScoreMap& scores,
                                    const SimilarityMatrix* oeuvre_sim = nullptr,
                                    const PanelOptions& opts = {});

// Unweighted mean of member scientists' mean IDR per field.
std::vector<FieldIdr> field_idr_means(const std::vector<PersonRow>& persons,
                                      const Corpus& corpus);

void apply_field_idr(std::vector<PersonRow>& persons,
                     const std::vector<FieldIdr>& field_idrs,
                     const Corpus& corpus);

std::vector<PersonYearRow> build_person_year(
    const Corpus& corpus, const ScoreMap& scores,
    const std::vector<FieldIdr>& field_idrs, const PanelOptions& opts = {});

struct SplitPersonRow {
  std::string person_id;
  int n_low = 0, n_high = 0;
  double sd_low = 0, sd_high = 0;
};

struct SplitReport {
  double median_idr = 0;
  int n_scored_papers = 0;
  std::vector<SplitPersonRow> persons;  // only persons with >=2 papers per side
  double mean_sd_low = 0, mean_sd_high = 0;
  std::vector<double> paired_diffs;  // sd_high - sd_low, one per person
};

// Splits scored papers at the global median IDR (ties go low) and compares
// the citation spread of each person's high- vs low-IDR papers.
SplitReport median_split_variance(const Corpus& corpus, const ScoreMap& scores);

void write_person_csv(const std::vector<PersonRow>& rows, std::ostream& out);
void write_person_year_csv(const std::vector<PersonYearRow>& rows, std::ostream& out);
std::vector<PersonYearRow> read_person_year_csv(std::istream& in);
void write_split_csv(const SplitReport& report, std::ostream& out);

// 5-year calendar bucket containing `year`, e.g. 1987 -> "1985-89".
std::string period_bucket(int year);

}  // namespace idr
