#include "idr/corpus.hpp"

#include <algorithm>

#include "idr/errors.hpp"

namespace idr {

ScId ScCatalog::intern(std::string_view label) {
  auto it = ids_.find(std::string(label));
  if (it != ids_.end()) return it->second;
  ScId id = static_cast<ScId>(labels_.size());
  labels_.emplace_back(label);
  ids_.emplace(labels_.back(), id);
  return id;
}

std::optional<ScId> ScCatalog::find(std::string_view label) const {
  auto it = ids_.find(std::string(label));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& ScCatalog::label(ScId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= labels_.size())
    throw DataError("subject category id out of range: " + std::to_string(id));
  return labels_[static_cast<std::size_t>(id)];
}

const PaperRecord* Corpus::find_paper(std::string_view paper_id) const {
  auto it = std::lower_bound(
      papers.begin(), papers.end(), paper_id,
      [](const PaperRecord& p, std::string_view id) { return p.paper_id < id; });
  if (it == papers.end() || it->paper_id != paper_id) return nullptr;
  return &*it;
}

std::pair<int, int> Corpus::year_range() const {
  if (papers.empty()) return {0, 0};
  int lo = papers.front().year, hi = papers.front().year;
  for (const auto& p : papers) {
    lo = std::min(lo, p.year);
    hi = std::max(hi, p.year);
  }
  return {lo, hi};
}

void Corpus::rebuild_indexes() {
  std::sort(papers.begin(), papers.end(),
            [](const PaperRecord& a, const PaperRecord& b) {
              return a.paper_id < b.paper_id;
            });
  papers_by_person.clear();
  for (std::size_t i = 0; i < papers.size(); ++i) {
    for (const auto& author : papers[i].author_ids) {
      if (persons.count(author)) papers_by_person[author].push_back(i);
    }
  }
}

}  // namespace idr
