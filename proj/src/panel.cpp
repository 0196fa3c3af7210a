#include "idr/panel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "idr/csv.hpp"
#include "idr/errors.hpp"
#include "idr/strutil.hpp"

namespace idr {

namespace {

constexpr int kImputedPhdOffset = 5;  // implied PhD year = first pub year + 5

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample standard deviation (n-1 denominator).
std::optional<double> sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return std::nullopt;
  double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string team_key(const PaperRecord& paper) {
  std::vector<std::string> authors = paper.author_ids;
  std::sort(authors.begin(), authors.end());
  authors.erase(std::unique(authors.begin(), authors.end()), authors.end());
  std::string key;
  for (const auto& a : authors) {
    key += a;
    key += '\x1f';
  }
  return key;
}

std::vector<std::string> pair_keys(const PaperRecord& paper) {
  std::vector<std::string> authors = paper.author_ids;
  std::sort(authors.begin(), authors.end());
  authors.erase(std::unique(authors.begin(), authors.end()), authors.end());
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < authors.size(); ++i)
    for (std::size_t j = i + 1; j < authors.size(); ++j)
      keys.push_back(authors[i] + '\x1f' + authors[j]);
  return keys;
}

bool earlier(const PaperRecord& a, const PaperRecord& b) {
  return std::make_pair(a.year, std::cref(a.paper_id)) <
         std::make_pair(b.year, std::cref(b.paper_id));
}

// Per-paper repeat-collaboration flags for the whole corpus in one sweep
// over (year, paper_id) order.
std::unordered_map<std::string, bool> repeat_flags(const Corpus& corpus,
                                                   CollabRule rule) {
  std::vector<const PaperRecord*> order;
  order.reserve(corpus.papers.size());
  for (const auto& p : corpus.papers) order.push_back(&p);
  std::sort(order.begin(), order.end(),
            [](const PaperRecord* a, const PaperRecord* b) { return earlier(*a, *b); });

  std::unordered_map<std::string, bool> flags;
  std::unordered_set<std::string> seen;
  for (const auto* p : order) {
    bool repeat = false;
    if (rule == CollabRule::ExactSet) {
      repeat = seen.count(team_key(*p)) != 0;
      seen.insert(team_key(*p));
    } else {
      for (const auto& k : pair_keys(*p))
        if (seen.count(k)) repeat = true;
      for (const auto& k : pair_keys(*p)) seen.insert(k);
    }
    flags[p->paper_id] = repeat;
  }
  return flags;
}

struct AgeBasis {
  int phd_year = 0;
  bool imputed = false;
};

AgeBasis age_basis(const PersonRecord& person, int first_pub_year) {
  if (person.phd_year) return {*person.phd_year, false};
  return {first_pub_year + kImputedPhdOffset, true};
}

}  // namespace

std::string period_bucket(int year) {
  int start = (year >= 0 ? year / 5 : (year - 4) / 5) * 5;
  return fstr("%d-%02d", start, (start + 4) % 100);
}

double coauthor_weighted_count(const std::vector<const PaperRecord*>& papers) {
  double total = 0;
  for (const auto* p : papers) {
    if (p->author_ids.empty())
      throw DataError("paper '" + p->paper_id + "' has no authors");
    total += 1.0 / static_cast<double>(p->author_ids.size());
  }
  return total;
}

bool repeat_collaboration(const PaperRecord& paper,
                          const std::vector<const PaperRecord*>& history,
                          CollabRule rule) {
  if (rule == CollabRule::ExactSet) {
    const std::string key = team_key(paper);
    for (const auto* h : history)
      if (earlier(*h, paper) && team_key(*h) == key) return true;
    return false;
  }
  std::unordered_set<std::string> prior;
  for (const auto* h : history)
    if (earlier(*h, paper))
      for (const auto& k : pair_keys(*h)) prior.insert(k);
  for (const auto& k : pair_keys(paper))
    if (prior.count(k)) return true;
  return false;
}

std::vector<PersonRow> build_person(const Corpus& corpus, const ScoreMap& scores,
                                    const SimilarityMatrix* oeuvre_sim,
                                    const PanelOptions& opts) {
  const int ref_year =
      opts.reference_year ? opts.reference_year : corpus.year_range().second;
  std::vector<PersonRow> rows;
  for (const auto& [person_id, person] : corpus.persons) {
    auto it = corpus.papers_by_person.find(person_id);
    if (it == corpus.papers_by_person.end()) continue;  // no publication record

    std::vector<const PaperRecord*> papers;
    for (std::size_t idx : it->second) papers.push_back(&corpus.papers[idx]);

    PersonRow row;
    row.person_id = person_id;
    row.field_id = person.field_id;
    row.total_pubs = static_cast<int>(papers.size());
    row.total_pubs_weighted = coauthor_weighted_count(papers);

    std::vector<double> cites, idrs, jifs;
    int first_year = papers.front()->year;
    for (const auto* p : papers) {
      first_year = std::min(first_year, p->year);
      row.total_citations += p->citations;
      cites.push_back(static_cast<double>(p->citations));
      auto jt = corpus.journals.find(p->journal_id);
      if (jt != corpus.journals.end() && jt->second.impact_factor)
        jifs.push_back(*jt->second.impact_factor);
      auto st = scores.find(p->paper_id);
      if (st != scores.end() && st->second.idr) {
        idrs.push_back(*st->second.idr);
      } else {
        ++row.papers_unscored;
      }
    }
    row.papers_scored = static_cast<int>(idrs.size());
    if (!idrs.empty()) row.mean_idr = mean(idrs);
    row.sd_citations = sample_sd(cites);
    row.mean_jif = mean(jifs);
    row.variety = variety(papers);
    if (oeuvre_sim)
      row.multidisciplinarity = multidisciplinarity(papers, *oeuvre_sim, corpus.catalog);

    AgeBasis basis = age_basis(person, first_year);
    row.professional_age = ref_year - basis.phd_year;
    row.age_imputed = basis.imputed;
    row.female = person.female;
    row.phd_rank = person.phd_rank;
    row.status = person.status;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<FieldIdr> field_idr_means(const std::vector<PersonRow>& persons,
                                      const Corpus& corpus) {
  std::map<std::string, std::vector<double>> by_field;
  for (const auto& [field_id, rec] : corpus.fields) by_field[field_id];
  for (const auto& row : persons) {
    if (row.mean_idr) by_field[row.field_id].push_back(*row.mean_idr);
  }
  std::vector<FieldIdr> out;
  for (const auto& [field_id, values] : by_field) {
    FieldIdr f;
    f.field_id = field_id;
    f.n_members = static_cast<int>(values.size());
    if (!values.empty()) f.mean_idr = mean(values);
    out.push_back(std::move(f));
  }
  return out;
}

void apply_field_idr(std::vector<PersonRow>& persons,
                     const std::vector<FieldIdr>& field_idrs,
                     const Corpus& corpus) {
  (void)corpus;
  std::map<std::string, std::optional<double>> lookup;
  for (const auto& f : field_idrs) lookup[f.field_id] = f.mean_idr;
  for (auto& row : persons) {
    auto it = lookup.find(row.field_id);
    if (it != lookup.end()) row.field_idr = it->second;
  }
}

std::vector<PersonYearRow> build_person_year(const Corpus& corpus,
                                             const ScoreMap& scores,
                                             const std::vector<FieldIdr>& field_idrs,
                                             const PanelOptions& opts) {
  std::map<std::string, std::optional<double>> field_lookup;
  for (const auto& f : field_idrs) field_lookup[f.field_id] = f.mean_idr;
  auto repeat = repeat_flags(corpus, opts.collab_rule);

  std::vector<PersonYearRow> rows;
  for (const auto& [person_id, person] : corpus.persons) {
    auto it = corpus.papers_by_person.find(person_id);
    if (it == corpus.papers_by_person.end()) continue;

    std::map<int, std::vector<const PaperRecord*>> by_year;
    for (std::size_t idx : it->second)
      by_year[corpus.papers[idx].year].push_back(&corpus.papers[idx]);

    AgeBasis basis = age_basis(person, by_year.begin()->first);
    std::optional<double> fidr;
    if (auto ft = field_lookup.find(person.field_id); ft != field_lookup.end())
      fidr = ft->second;

    int cum_pubs = 0;
    std::int64_t cum_cites = 0;
    for (const auto& [year, papers] : by_year) {
      PersonYearRow row;
      row.person_id = person_id;
      row.year = year;
      row.period = period_bucket(year);
      row.productivity = static_cast<int>(papers.size());
      row.weighted_productivity = coauthor_weighted_count(papers);
      row.lag_cum_pubs = cum_pubs;
      row.lag_cum_cites_log = std::log1p(static_cast<double>(cum_cites));

      std::vector<double> idrs, jifs, reaches, authors, repeats;
      for (const auto* p : papers) {
        row.citations += p->citations;
        authors.push_back(static_cast<double>(p->author_ids.size()));
        if (!p->focal_scs.empty())
          reaches.push_back(static_cast<double>(p->focal_scs.size()));
        auto jt = corpus.journals.find(p->journal_id);
        if (jt != corpus.journals.end() && jt->second.impact_factor)
          jifs.push_back(*jt->second.impact_factor);
        repeats.push_back(repeat.at(p->paper_id) ? 1.0 : 0.0);
        auto st = scores.find(p->paper_id);
        if (st != scores.end() && st->second.idr) idrs.push_back(*st->second.idr);
      }
      if (!idrs.empty()) row.mean_idr = mean(idrs);
      row.mean_authors = mean(authors);
      row.mean_jif = mean(jifs);
      row.mean_reach = mean(reaches);
      row.repeat_collab_share = mean(repeats);
      row.professional_age = year - basis.phd_year;
      row.age_imputed = basis.imputed;
      row.field_idr = fidr;
      row.excluded = !row.mean_idr || *row.mean_idr == 0.0;
      rows.push_back(std::move(row));

      cum_pubs += static_cast<int>(papers.size());
      for (const auto* p : papers) cum_cites += p->citations;
    }
  }
  return rows;
}

SplitReport median_split_variance(const Corpus& corpus, const ScoreMap& scores) {
  SplitReport report;
  std::vector<double> all_idrs;
  for (const auto& [id, m] : scores)
    if (m.idr) all_idrs.push_back(*m.idr);
  report.n_scored_papers = static_cast<int>(all_idrs.size());
  if (all_idrs.empty()) return report;

  std::sort(all_idrs.begin(), all_idrs.end());
  const std::size_t n = all_idrs.size();
  report.median_idr = (n % 2 == 1)
                          ? all_idrs[n / 2]
                          : 0.5 * (all_idrs[n / 2 - 1] + all_idrs[n / 2]);

  std::vector<double> lows, highs;
  for (const auto& [person_id, indices] : corpus.papers_by_person) {
    std::vector<double> low_cites, high_cites;
    for (std::size_t idx : indices) {
      const auto& paper = corpus.papers[idx];
      auto st = scores.find(paper.paper_id);
      if (st == scores.end() || !st->second.idr) continue;
      // Ties at the median go to the low group.
      if (*st->second.idr <= report.median_idr)
        low_cites.push_back(static_cast<double>(paper.citations));
      else
        high_cites.push_back(static_cast<double>(paper.citations));
    }
    auto sd_low = sample_sd(low_cites);
    auto sd_high = sample_sd(high_cites);
    if (!sd_low || !sd_high) continue;  // needs >= 2 papers on each side
    SplitPersonRow row;
    row.person_id = person_id;
    row.n_low = static_cast<int>(low_cites.size());
    row.n_high = static_cast<int>(high_cites.size());
    row.sd_low = *sd_low;
    row.sd_high = *sd_high;
    lows.push_back(row.sd_low);
    highs.push_back(row.sd_high);
    report.paired_diffs.push_back(row.sd_high - row.sd_low);
    report.persons.push_back(std::move(row));
  }
  report.mean_sd_low = mean(lows);
  report.mean_sd_high = mean(highs);
  return report;
}

namespace {

std::string opt_num(const std::optional<double>& v) {
  return v ? fstr("%.6f", *v) : std::string();
}

}  // namespace

void write_person_csv(const std::vector<PersonRow>& rows, std::ostream& out) {
  out << "person_id,field_id,total_pubs,total_pubs_weighted,total_citations,"
         "mean_idr,sd_citations,variety,multidisciplinarity,mean_jif,"
         "professional_age,age_imputed,field_idr,female,phd_rank,status,"
         "papers_scored,papers_unscored\n";
  for (const auto& r : rows) {
    out << csv_row(
        {r.person_id, r.field_id, std::to_string(r.total_pubs),
         fstr("%.6f", r.total_pubs_weighted), std::to_string(r.total_citations),
         opt_num(r.mean_idr), opt_num(r.sd_citations), std::to_string(r.variety),
         opt_num(r.multidisciplinarity), fstr("%.6f", r.mean_jif),
         std::to_string(r.professional_age), r.age_imputed ? "1" : "0",
         opt_num(r.field_idr),
         r.female ? std::to_string(*r.female) : std::string(),
         r.phd_rank ? fstr("%.6f", *r.phd_rank) : std::string(),
         r.status ? fstr("%.6f", *r.status) : std::string(),
         std::to_string(r.papers_scored), std::to_string(r.papers_unscored)});
  }
}

static const std::vector<std::string> kPersonYearHeader = {
    "person_id", "year", "period", "productivity", "weighted_productivity",
    "citations", "mean_idr", "mean_authors", "mean_jif", "repeat_collab_share",
    "mean_reach", "lag_cum_pubs", "lag_cum_cites_log", "professional_age",
    "age_imputed", "field_idr", "excluded"};

void write_person_year_csv(const std::vector<PersonYearRow>& rows,
                           std::ostream& out) {
  std::string header;
  for (std::size_t i = 0; i < kPersonYearHeader.size(); ++i) {
    if (i) header += ',';
    header += kPersonYearHeader[i];
  }
  out << header << '\n';
  for (const auto& r : rows) {
    out << csv_row({r.person_id, std::to_string(r.year), r.period,
                    std::to_string(r.productivity),
                    fstr("%.6f", r.weighted_productivity),
                    std::to_string(r.citations), opt_num(r.mean_idr),
                    fstr("%.6f", r.mean_authors), fstr("%.6f", r.mean_jif),
                    fstr("%.6f", r.repeat_collab_share),
                    fstr("%.6f", r.mean_reach), std::to_string(r.lag_cum_pubs),
                    fstr("%.6f", r.lag_cum_cites_log),
                    std::to_string(r.professional_age),
                    r.age_imputed ? "1" : "0", opt_num(r.field_idr),
                    r.excluded ? "1" : "0"});
  }
}

std::vector<PersonYearRow> read_person_year_csv(std::istream& in) {
  auto header = csv_read_row(in);
  if (!header || *header != kPersonYearHeader)
    throw DataError("person-year csv: unexpected header");
  std::vector<PersonYearRow> rows;
  while (auto row = csv_read_row(in)) {
    if (row->size() != kPersonYearHeader.size())
      throw DataError("person-year csv: wrong field count");
    PersonYearRow r;
    int i = 0;
    r.person_id = (*row)[i++];
    r.year = std::stoi((*row)[i++]);
    r.period = (*row)[i++];
    r.productivity = std::stoi((*row)[i++]);
    r.weighted_productivity = std::stod((*row)[i++]);
    r.citations = std::stoll((*row)[i++]);
    if (!(*row)[i].empty()) r.mean_idr = std::stod((*row)[i]);
    ++i;
    r.mean_authors = std::stod((*row)[i++]);
    r.mean_jif = std::stod((*row)[i++]);
    r.repeat_collab_share = std::stod((*row)[i++]);
    r.mean_reach = std::stod((*row)[i++]);
    r.lag_cum_pubs = std::stoi((*row)[i++]);
    r.lag_cum_cites_log = std::stod((*row)[i++]);
    r.professional_age = std::stoi((*row)[i++]);
    r.age_imputed = (*row)[i++] == "1";
    if (!(*row)[i].empty()) r.field_idr = std::stod((*row)[i]);
    ++i;
    r.excluded = (*row)[i++] == "1";
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_split_csv(const SplitReport& report, std::ostream& out) {
  out << "person_id,n_low,n_high,sd_low,sd_high,diff\n";
  for (const auto& r : report.persons) {
    out << csv_row({r.person_id, std::to_string(r.n_low),
                    std::to_string(r.n_high), fstr("%.6f", r.sd_low),
                    fstr("%.6f", r.sd_high), fstr("%.6f", r.sd_high - r.sd_low)});
  }
}

}  // namespace idr
