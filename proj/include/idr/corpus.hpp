#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace idr {

using ScId = std::int32_t;

// Dense, append-only mapping between subject-category labels and ids.
// Ids are 0..K-1 in order of first appearance; labels are unique.
class ScCatalog {
 public:
  ScId intern(std::string_view label);
  std::optional<ScId> find(std::string_view label) const;
  const std::string& label(ScId id) const;
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, ScId> ids_;
};

struct JournalRecord {
  std::string journal_id;
  std::vector<ScId> sc_ids;  // 1-6 for real index data; validated, not enforced
  std::optional<double> impact_factor;
};

struct PaperRecord {
  std::string paper_id;
  std::vector<std::string> author_ids;
  int year = 0;
  std::string journal_id;
  std::vector<ScId> focal_scs;
  // References in the two accepted source forms (unresolvable ones are
  // dropped or rejected at load time, so these are always resolvable).
  std::vector<std::string> ref_journals;
  std::vector<std::string> ref_sc_labels;
  // One entry per reference, in ref_journals then ref_sc_labels order:
  // the SCs of the reference's journal (or the single direct SC).
  std::vector<std::vector<ScId>> ref_scs;
  std::int64_t citations = 0;

  int ref_count() const { return static_cast<int>(ref_scs.size()); }
};

struct PersonRecord {
  std::string person_id;
  std::string field_id;
  std::optional<int> phd_year;
  std::optional<int> female;
  std::optional<double> phd_rank;
  std::optional<double> status;
};

struct FieldRecord {
  std::string field_id;
  double size_phds = 0;
  double avg_citations = 0;
  double turnaround_months = 0;
};

struct Corpus {
  ScCatalog catalog;
  std::vector<PaperRecord> papers;  // sorted by paper_id
  std::map<std::string, JournalRecord> journals;
  std::map<std::string, PersonRecord> persons;
  std::map<std::string, FieldRecord> fields;
  // Paper indices per person, for persons present in the persons table.
  std::map<std::string, std::vector<std::size_t>> papers_by_person;

  const PaperRecord* find_paper(std::string_view paper_id) const;
  // Min/max publication year; {0,0} for an empty corpus.
  std::pair<int, int> year_range() const;
  void rebuild_indexes();
};

}  // namespace idr
