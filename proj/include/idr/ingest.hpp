#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "idr/corpus.hpp"
#include "idr/errors.hpp"

namespace idr {

enum class Strictness { Strict, Lenient };

// Strict-mode failure for unresolvable references; carries the number of
// offending references, which equals the lenient-mode drop count.
struct ResolutionError : DataError {
  std::int64_t count;
  ResolutionError(const std::string& msg, std::int64_t n)
      : DataError(msg), count(n) {}
};

struct CorpusPaths {
  std::filesystem::path papers;
  std::filesystem::path journals;
  std::filesystem::path persons;  // optional: may be empty
  std::filesystem::path fields;   // optional: may be empty

  // Conventional file names inside a corpus directory. Missing optional
  // files (persons/fields) are tolerated; papers/journals must exist.
  static CorpusPaths in_dir(const std::filesystem::path& dir);
};

struct LoadReport {
  std::int64_t dropped_references = 0;   // lenient mode only
  std::int64_t unresolved_journals = 0;  // papers whose own journal is unknown
  std::vector<std::string> warnings;
};

// Parses the JSONL corpus files and resolves every cross-reference.
// Lenient mode drops unresolvable references with a counted warning;
// strict mode collects them all and throws DataError.
Corpus load_corpus(const CorpusPaths& paths, Strictness strictness,
                   LoadReport* report = nullptr);

// Canonical serialization: records sorted by id, fixed key order, one
// object per line. load(save(load(x))) emits the same bytes as save(load(x)).
void save_corpus(const Corpus& corpus, const CorpusPaths& paths);

struct Violation {
  std::string rule;
  std::string entity_id;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::map<std::string, int> counts() const;
  bool empty() const { return violations.empty(); }
};

// Report-only invariant checks; never mutates the corpus.
ValidationReport validate_corpus(const Corpus& corpus);

}  // namespace idr
