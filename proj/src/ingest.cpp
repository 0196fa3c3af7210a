#include "idr/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "idr/strutil.hpp"
#include "nlohmann/json.hpp"

namespace idr {

using json = nlohmann::json;

namespace {

std::string where(const std::filesystem::path& path, int line) {
  return path.filename().string() + ":" + std::to_string(line);
}

// Applies `fn` to each non-blank line parsed as a JSON object.
template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(where(path, lineno) + ": malformed line: " + e.what());
    }
    if (!j.is_object())
      throw DataError(where(path, lineno) + ": expected a JSON object");
    fn(j, lineno);
  }
}

std::string need_string(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw DataError(ctx + ": missing or non-string field '" + key + "'");
  return j.at(key).get<std::string>();
}

std::int64_t need_int(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || !j.at(key).is_number_integer())
    throw DataError(ctx + ": missing or non-integer field '" + key + "'");
  return j.at(key).get<std::int64_t>();
}

double need_finite(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw DataError(ctx + ": missing or non-numeric field '" + key + "'");
  double v = j.at(key).get<double>();
  if (!std::isfinite(v))
    throw DataError(ctx + ": field '" + key + "' is not finite");
  return v;
}

std::optional<double> opt_finite(const json& j, const char* key,
                                 const std::string& ctx) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number())
    throw DataError(ctx + ": non-numeric field '" + key + "'");
  double v = j.at(key).get<double>();
  if (!std::isfinite(v))
    throw DataError(ctx + ": field '" + key + "' is not finite");
  return v;
}

std::vector<std::string> string_list(const json& j, const char* key,
                                     const std::string& ctx) {
  std::vector<std::string> out;
  if (!j.contains(key) || j.at(key).is_null()) return out;
  if (!j.at(key).is_array())
    throw DataError(ctx + ": field '" + key + "' is not an array");
  for (const auto& v : j.at(key)) {
    if (!v.is_string())
      throw DataError(ctx + ": field '" + key + "' has a non-string entry");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

CorpusPaths CorpusPaths::in_dir(const std::filesystem::path& dir) {
  CorpusPaths p;
  p.papers = dir / "papers.jsonl";
  p.journals = dir / "journals.jsonl";
  auto persons = dir / "persons.jsonl";
  auto fields = dir / "fields.jsonl";
  if (std::filesystem::exists(persons)) p.persons = persons;
  if (std::filesystem::exists(fields)) p.fields = fields;
  return p;
}

Corpus load_corpus(const CorpusPaths& paths, Strictness strictness,
                   LoadReport* report) {
  Corpus corpus;
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  std::vector<std::string> strict_errors;

  for_each_record(paths.journals, [&](const json& j, int lineno) {
    const std::string ctx = where(paths.journals, lineno);
    JournalRecord rec;
    rec.journal_id = need_string(j, "journal_id", ctx);
    for (const auto& label : string_list(j, "scs", ctx))
      rec.sc_ids.push_back(corpus.catalog.intern(label));
    rec.impact_factor = opt_finite(j, "jif", ctx);
    if (!corpus.journals.emplace(rec.journal_id, std::move(rec)).second)
      throw DataError(ctx + ": duplicate journal_id '" +
                      j.at("journal_id").get<std::string>() + "'");
  });

  if (!paths.persons.empty()) {
    for_each_record(paths.persons, [&](const json& j, int lineno) {
      const std::string ctx = where(paths.persons, lineno);
      PersonRecord rec;
      rec.person_id = need_string(j, "person_id", ctx);
      rec.field_id = need_string(j, "field_id", ctx);
      if (j.contains("phd_year") && !j.at("phd_year").is_null())
        rec.phd_year = static_cast<int>(need_int(j, "phd_year", ctx));
      if (j.contains("female") && !j.at("female").is_null())
        rec.female = static_cast<int>(need_int(j, "female", ctx));
      rec.phd_rank = opt_finite(j, "phd_rank", ctx);
      rec.status = opt_finite(j, "status", ctx);
      if (!corpus.persons.emplace(rec.person_id, std::move(rec)).second)
        throw DataError(ctx + ": duplicate person_id");
    });
  }

  if (!paths.fields.empty()) {
    for_each_record(paths.fields, [&](const json& j, int lineno) {
      const std::string ctx = where(paths.fields, lineno);
      FieldRecord rec;
      rec.field_id = need_string(j, "field_id", ctx);
      rec.size_phds = need_finite(j, "size_phds", ctx);
      rec.avg_citations = need_finite(j, "avg_citations", ctx);
      rec.turnaround_months = need_finite(j, "turnaround_months", ctx);
      if (!corpus.fields.emplace(rec.field_id, std::move(rec)).second)
        throw DataError(ctx + ": duplicate field_id");
    });
  }

  std::set<std::string> seen_papers;
  for_each_record(paths.papers, [&](const json& j, int lineno) {
    const std::string ctx = where(paths.papers, lineno);
    PaperRecord rec;
    rec.paper_id = need_string(j, "paper_id", ctx);
    if (!seen_papers.insert(rec.paper_id).second)
      throw DataError(ctx + ": duplicate paper_id '" + rec.paper_id + "'");
    rec.author_ids = string_list(j, "author_ids", ctx);
    rec.year = static_cast<int>(need_int(j, "year", ctx));
    if (j.contains("journal_id")) rec.journal_id = need_string(j, "journal_id", ctx);
    for (const auto& label : string_list(j, "focal_scs", ctx))
      rec.focal_scs.push_back(corpus.catalog.intern(label));
    if (j.contains("citations")) rec.citations = need_int(j, "citations", ctx);

    if (!rec.journal_id.empty() && !corpus.journals.count(rec.journal_id)) {
      if (strictness == Strictness::Strict) {
        throw DataError(ctx + ": unknown journal '" + rec.journal_id +
                        "' for paper '" + rec.paper_id + "'");
      }
      ++rep.unresolved_journals;
      rep.warnings.push_back(ctx + ": paper '" + rec.paper_id +
                             "' published in unknown journal '" +
                             rec.journal_id + "'");
    }

    for (const auto& jid : string_list(j, "ref_journals", ctx)) {
      auto it = corpus.journals.find(jid);
      if (it == corpus.journals.end() || it->second.sc_ids.empty()) {
        if (strictness == Strictness::Strict) {
          strict_errors.push_back(ctx + ": paper '" + rec.paper_id +
                                  "' references unresolvable journal '" + jid +
                                  "'");
        } else {
          ++rep.dropped_references;
          rep.warnings.push_back(ctx + ": dropped reference to unknown journal '" +
                                 jid + "' in paper '" + rec.paper_id + "'");
        }
        continue;
      }
      rec.ref_journals.push_back(jid);
      rec.ref_scs.push_back(it->second.sc_ids);
    }
    for (const auto& label : string_list(j, "ref_scs", ctx)) {
      rec.ref_sc_labels.push_back(label);
      rec.ref_scs.push_back({corpus.catalog.intern(label)});
    }
    corpus.papers.push_back(std::move(rec));
  });

  if (!strict_errors.empty()) {
    std::string msg = std::to_string(strict_errors.size()) +
                      " unresolvable reference(s); first: " + strict_errors.front();
    throw ResolutionError(msg, static_cast<std::int64_t>(strict_errors.size()));
  }

  corpus.rebuild_indexes();
  return corpus;
}

void save_corpus(const Corpus& corpus, const CorpusPaths& paths) {
  auto open = [](const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
  };

  {
    auto out = open(paths.journals);
    for (const auto& [id, rec] : corpus.journals) {
      json j;
      j["journal_id"] = id;
      json scs = json::array();
      for (ScId sc : rec.sc_ids) scs.push_back(corpus.catalog.label(sc));
      j["scs"] = scs;
      if (rec.impact_factor) j["jif"] = *rec.impact_factor;
      out << j.dump() << '\n';
    }
  }
  {
    auto out = open(paths.papers);
    for (const auto& p : corpus.papers) {
      json j;
      j["paper_id"] = p.paper_id;
      j["author_ids"] = p.author_ids;
      j["year"] = p.year;
      if (!p.journal_id.empty()) j["journal_id"] = p.journal_id;
      json focal = json::array();
      for (ScId sc : p.focal_scs) focal.push_back(corpus.catalog.label(sc));
      j["focal_scs"] = focal;
      if (!p.ref_journals.empty()) j["ref_journals"] = p.ref_journals;
      if (!p.ref_sc_labels.empty()) j["ref_scs"] = p.ref_sc_labels;
      j["citations"] = p.citations;
      out << j.dump() << '\n';
    }
  }
  if (!paths.persons.empty()) {
    auto out = open(paths.persons);
    for (const auto& [id, rec] : corpus.persons) {
      json j;
      j["person_id"] = id;
      j["field_id"] = rec.field_id;
      if (rec.phd_year) j["phd_year"] = *rec.phd_year;
      if (rec.female) j["female"] = *rec.female;
      if (rec.phd_rank) j["phd_rank"] = *rec.phd_rank;
      if (rec.status) j["status"] = *rec.status;
      out << j.dump() << '\n';
    }
  }
  if (!paths.fields.empty()) {
    auto out = open(paths.fields);
    for (const auto& [id, rec] : corpus.fields) {
      json j;
      j["field_id"] = id;
      j["size_phds"] = rec.size_phds;
      j["avg_citations"] = rec.avg_citations;
      j["turnaround_months"] = rec.turnaround_months;
      out << j.dump() << '\n';
    }
  }
}

std::map<std::string, int> ValidationReport::counts() const {
  std::map<std::string, int> out;
  for (const auto& v : violations) ++out[v.rule];
  return out;
}

ValidationReport validate_corpus(const Corpus& corpus) {
  ValidationReport report;
  auto add = [&](const std::string& rule, const std::string& entity,
                 const std::string& detail) {
    report.violations.push_back({rule, entity, detail});
  };

  for (const auto& [id, j] : corpus.journals) {
    if (j.sc_ids.empty() || j.sc_ids.size() > 6)
      add("sc-count", id,
          "journal has " + std::to_string(j.sc_ids.size()) + " SCs (expected 1-6)");
    std::set<ScId> uniq(j.sc_ids.begin(), j.sc_ids.end());
    if (uniq.size() != j.sc_ids.size())
      add("sc-dup", id, "journal lists a subject category twice");
    if (j.impact_factor && *j.impact_factor < 0)
      add("jif-negative", id, "negative impact factor");
  }

  for (const auto& p : corpus.papers) {
    if (p.author_ids.empty()) add("authors", p.paper_id, "paper has no authors");
    if (p.citations < 0) add("citations", p.paper_id, "negative citation count");
    if (p.focal_scs.empty())
      add("focal-empty", p.paper_id, "paper has no focal subject categories");
    if (!p.journal_id.empty() && !corpus.journals.count(p.journal_id))
      add("journal-unknown", p.paper_id,
          "published in unknown journal '" + p.journal_id + "'");
    for (const auto& author : p.author_ids) {
      auto it = corpus.persons.find(author);
      if (it == corpus.persons.end() || !it->second.phd_year) continue;
      if (p.year < *it->second.phd_year - 10)
        add("age", p.paper_id,
            "published " + std::to_string(p.year) + ", more than 10 years before " +
                author + "'s PhD year " + std::to_string(*it->second.phd_year));
    }
  }

  for (const auto& [id, f] : corpus.fields) {
    if (f.size_phds < 0 || f.avg_citations < 0 || f.turnaround_months < 0)
      add("field-numeric", id, "negative field-level value");
  }

  return report;
}

}  // namespace idr
