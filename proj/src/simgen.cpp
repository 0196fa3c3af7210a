#include "idr/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "idr/errors.hpp"
#include "idr/ingest.hpp"
#include "idr/metrics.hpp"
#include "idr/strutil.hpp"
#include "nlohmann/json.hpp"

namespace idr {

using json = nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97f4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master ^ (0x9E3779B97f4A7C15ULL * (index + 1));
  splitmix64(state);
  return splitmix64(state);
}

// Samplers are hand-rolled so seeded output does not depend on the C++
// standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // Decorrelate trivially related seeds.
    splitmix64(state_);
  }

  double uniform() {  // (0,1)
    return (static_cast<double>(splitmix64(state_) >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(double mean, double sd) {
    // Polar Box-Muller, spare discarded for a fixed draw order.
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return mean + sd * u * std::sqrt(-2.0 * std::log(s) / s);
  }

  int poisson(double lambda) {
    lambda = std::min(lambda, 500.0);
    const double limit = std::exp(-lambda);
    double p = 1.0;
    int k = 0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  int uniform_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1)) % (hi - lo + 1);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

int block_of(int sc, int sc_count, int blocks) {
  const int base = sc_count / blocks;
  return std::min(sc / std::max(1, base), blocks - 1);
}

std::string sc_label(int i) { return fstr("SC%03d", i); }

double pair_idr(double s, double w) {
  // Two-SC mixture, proportions (w, 1-w), unordered pairs counted once.
  return (2.0 - s) * w * (1.0 - w);
}

}  // namespace

SimilarityMatrix block_similarity(int sc_count, int blocks, double within_s,
                                  double adjacent_s) {
  if (sc_count < 2 || blocks < 1 || blocks > sc_count)
    throw DataError("block similarity: invalid dimensions");
  if (within_s < 0 || within_s > 1 || adjacent_s < 0 || adjacent_s > 1)
    throw DataError("block similarity: s levels outside [0,1]");
  std::vector<std::string> labels;
  for (int i = 0; i < sc_count; ++i) labels.push_back(sc_label(i));
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(sc_count, sc_count);
  for (int i = 0; i < sc_count; ++i) {
    for (int j = i; j < sc_count; ++j) {
      double v;
      if (i == j) {
        v = 1.0;
      } else {
        const int d = std::abs(block_of(i, sc_count, blocks) -
                               block_of(j, sc_count, blocks));
        v = d == 0 ? within_s : (d == 1 ? adjacent_s : 0.0);
      }
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return SimilarityMatrix(std::move(labels), std::move(s), "synthetic",
                          SimProvenance::Fixture);
}

std::vector<ScId> target_idr_mix(double target, const SimilarityMatrix& sim,
                                 int n_refs) {
  constexpr double kTol = 0.02;
  if (n_refs < 1) throw DataError("target_idr_mix: need at least one reference");
  if (target < 0.0 || target >= 1.0)
    throw DataError("target_idr_mix: target outside [0,1)");

  const int k = sim.dim();
  // One representative per distinct off-diagonal similarity value keeps the
  // candidate set small whatever the matrix size.
  std::vector<std::pair<int, int>> pairs;
  {
    std::vector<double> seen;
    for (int i = 0; i < k && pairs.size() < 64; ++i) {
      for (int j = i + 1; j < k && pairs.size() < 64; ++j) {
        const double s = sim.at(i, j);
        bool dup = false;
        for (double v : seen) dup = dup || std::abs(v - s) < 1e-12;
        if (!dup) {
          seen.push_back(s);
          pairs.emplace_back(i, j);
        }
      }
    }
  }
  if (pairs.empty()) pairs.emplace_back(0, 0);  // single-SC catalog

  struct Best {
    double err = 1e9;
    std::vector<std::pair<int, int>> alloc;  // (sc, count)
  } best;

  auto consider = [&](double idr, std::vector<std::pair<int, int>> alloc) {
    const double err = std::abs(idr - target);
    if (err < best.err - 1e-15) {
      best.err = err;
      best.alloc = std::move(alloc);
    }
  };

  // All references in one SC: IDR exactly 0.
  consider(0.0, {{0, n_refs}});

  for (const auto& [i, j] : pairs) {
    if (i == j) continue;
    const double s = sim.at(i, j);
    for (int m = 1; m < n_refs; ++m) {
      const double w = static_cast<double>(m) / n_refs;
      consider(pair_idr(s, w), {{i, m}, {j, n_refs - m}});
    }
  }

  // Three-SC fallback over pairs of candidate pairs sharing structure: use
  // the SCs of the two most dissimilar candidate pairs.
  if (best.err > kTol && k >= 3) {
    std::vector<int> scs;
    for (const auto& [i, j] : pairs) {
      scs.push_back(i);
      scs.push_back(j);
    }
    std::sort(scs.begin(), scs.end());
    scs.erase(std::unique(scs.begin(), scs.end()), scs.end());
    const int m = static_cast<int>(scs.size());
    for (int a = 0; a < m; ++a) {
      for (int b = a + 1; b < m; ++b) {
        for (int c = b + 1; c < m; ++c) {
          const double sab = sim.at(scs[a], scs[b]);
          const double sac = sim.at(scs[a], scs[c]);
          const double sbc = sim.at(scs[b], scs[c]);
          for (int m1 = 1; m1 < n_refs - 1; ++m1) {
            for (int m2 = 1; m1 + m2 < n_refs; ++m2) {
              const int m3 = n_refs - m1 - m2;
              const double p1 = static_cast<double>(m1) / n_refs;
              const double p2 = static_cast<double>(m2) / n_refs;
              const double p3 = static_cast<double>(m3) / n_refs;
              const double idr = 1.0 - (p1 * p1 + p2 * p2 + p3 * p3 +
                                        sab * p1 * p2 + sac * p1 * p3 +
                                        sbc * p2 * p3);
              consider(idr, {{scs[a], m1}, {scs[b], m2}, {scs[c], m3}});
            }
          }
        }
      }
    }
  }

  if (best.err > kTol)
    throw DataError(fstr(
        "target IDR %.4f unreachable within 0.02 for this similarity structure",
        target));

  std::vector<ScId> out;
  out.reserve(static_cast<std::size_t>(n_refs));
  for (const auto& [sc, count] : best.alloc)
    for (int c = 0; c < count; ++c) out.push_back(static_cast<ScId>(sc));
  return out;
}

void SimConfig::validate() const {
  if (seed == 0) throw DataError("sim config: a nonzero seed is mandatory");
  if (n_persons < 1 || n_fields < 1 || n_fields > n_persons)
    throw DataError("sim config: invalid person/field counts");
  if (year_lo > year_hi) throw DataError("sim config: empty year range");
  if (sc_count < 2 * n_fields)
    throw DataError("sim config: need at least 2 SCs per field block");
  if (refs_per_paper < 4)
    throw DataError("sim config: refs_per_paper must be at least 4");
  if (field_idr_lo < 0 || field_idr_hi >= 1 || field_idr_lo > field_idr_hi)
    throw DataError("sim config: field IDR range invalid");
  if (person_idr_sd < 0 || within_person_idr_sd < 0 || sigma0_dispersion < 0 ||
      gamma_idr_citation_dispersion < 0)
    throw DataError("sim config: negative spread parameter");
  if (base_pubs_log > 4.0)
    throw DataError("sim config: base publication rate implausibly high");
  for (double v : {beta_idr_productivity, beta_idr_citation_mean,
                   beta_idr_x_field, beta_cite_x_field, base_pubs_log,
                   base_cites_log, period_drift})
    if (!std::isfinite(v)) throw DataError("sim config: non-finite effect size");
  if (within_block_s < 0 || within_block_s > 1 || adjacent_block_s < 0 ||
      adjacent_block_s > 1)
    throw DataError("sim config: similarity levels outside [0,1]");
}

SimConfig SimConfig::from_kv(const KvConfig& kv) {
  SimConfig c;
  if (!kv.has("seed")) throw DataError("sim config: 'seed' is mandatory");
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed"));
  c.n_persons = static_cast<int>(kv.get_int("persons", c.n_persons));
  c.n_fields = static_cast<int>(kv.get_int("fields", c.n_fields));
  c.year_lo = static_cast<int>(kv.get_int("year_lo", c.year_lo));
  c.year_hi = static_cast<int>(kv.get_int("year_hi", c.year_hi));
  c.sc_count = static_cast<int>(kv.get_int("sc_count", c.sc_count));
  c.refs_per_paper = static_cast<int>(kv.get_int("refs_per_paper", c.refs_per_paper));
  c.field_idr_lo = kv.get_double("field_idr_lo", c.field_idr_lo);
  c.field_idr_hi = kv.get_double("field_idr_hi", c.field_idr_hi);
  c.person_idr_sd = kv.get_double("person_idr_sd", c.person_idr_sd);
  c.within_person_idr_sd =
      kv.get_double("within_person_idr_sd", c.within_person_idr_sd);
  c.beta_idr_productivity =
      kv.get_double("beta_idr_productivity", c.beta_idr_productivity);
  c.beta_idr_citation_mean =
      kv.get_double("beta_idr_citation_mean", c.beta_idr_citation_mean);
  c.gamma_idr_citation_dispersion = kv.get_double(
      "gamma_idr_citation_dispersion", c.gamma_idr_citation_dispersion);
  c.beta_idr_x_field = kv.get_double("beta_idr_x_field", c.beta_idr_x_field);
  c.beta_cite_x_field = kv.get_double("beta_cite_x_field", c.beta_cite_x_field);
  c.base_pubs_log = kv.get_double("base_pubs_log", c.base_pubs_log);
  c.base_cites_log = kv.get_double("base_cites_log", c.base_cites_log);
  c.sigma0_dispersion = kv.get_double("sigma0_dispersion", c.sigma0_dispersion);
  c.repeat_team_rate = kv.get_double("repeat_team_rate", c.repeat_team_rate);
  c.period_drift = kv.get_double("period_drift", c.period_drift);
  c.within_block_s = kv.get_double("within_block_s", c.within_block_s);
  c.adjacent_block_s = kv.get_double("adjacent_block_s", c.adjacent_block_s);
  c.validate();
  return c;
}

std::string SimConfig::to_kv_string() const {
  std::string out;
  out += fstr("seed=%llu\n", static_cast<unsigned long long>(seed));
  out += fstr("persons=%d\n", n_persons);
  out += fstr("fields=%d\n", n_fields);
  out += fstr("year_lo=%d\n", year_lo);
  out += fstr("year_hi=%d\n", year_hi);
  out += fstr("sc_count=%d\n", sc_count);
  out += fstr("refs_per_paper=%d\n", refs_per_paper);
  out += fstr("field_idr_lo=%.6g\n", field_idr_lo);
  out += fstr("field_idr_hi=%.6g\n", field_idr_hi);
  out += fstr("person_idr_sd=%.6g\n", person_idr_sd);
  out += fstr("within_person_idr_sd=%.6g\n", within_person_idr_sd);
  out += fstr("beta_idr_productivity=%.6g\n", beta_idr_productivity);
  out += fstr("beta_idr_citation_mean=%.6g\n", beta_idr_citation_mean);
  out += fstr("gamma_idr_citation_dispersion=%.6g\n", gamma_idr_citation_dispersion);
  out += fstr("beta_idr_x_field=%.6g\n", beta_idr_x_field);
  out += fstr("beta_cite_x_field=%.6g\n", beta_cite_x_field);
  out += fstr("base_pubs_log=%.6g\n", base_pubs_log);
  out += fstr("base_cites_log=%.6g\n", base_cites_log);
  out += fstr("sigma0_dispersion=%.6g\n", sigma0_dispersion);
  out += fstr("repeat_team_rate=%.6g\n", repeat_team_rate);
  out += fstr("period_drift=%.6g\n", period_drift);
  out += fstr("within_block_s=%.6g\n", within_block_s);
  out += fstr("adjacent_block_s=%.6g\n", adjacent_block_s);
  return out;
}

GenerateResult generate(const SimConfig& config) {
  config.validate();
  GenerateResult result;
  result.similarity = block_similarity(config.sc_count, config.n_fields,
                                       config.within_block_s,
                                       config.adjacent_block_s);
  Corpus& corpus = result.corpus;
  for (int i = 0; i < config.sc_count; ++i) corpus.catalog.intern(sc_label(i));

  // Achievable ceiling under the search's two- and three-SC mixtures.
  double s_min = 1.0;
  double s3_min = 3.0;
  {
    std::vector<int> reps;
    const int base = config.sc_count / config.n_fields;
    for (int b = 0; b < config.n_fields; ++b) reps.push_back(b * base);
    for (std::size_t a = 0; a < reps.size(); ++a)
      for (std::size_t b = a + 1; b < reps.size(); ++b)
        s_min = std::min(s_min, result.similarity.at(reps[a], reps[b]));
    for (std::size_t a = 0; a < reps.size(); ++a)
      for (std::size_t b = a + 1; b < reps.size(); ++b)
        for (std::size_t c = b + 1; c < reps.size(); ++c)
          s3_min = std::min(
              s3_min, result.similarity.at(reps[a], reps[b]) +
                          result.similarity.at(reps[a], reps[c]) +
                          result.similarity.at(reps[b], reps[c]));
  }
  double ceiling = 0.5 - 0.25 * s_min;
  if (config.n_fields >= 3) ceiling = std::max(ceiling, (6.0 - s3_min) / 9.0);
  const double hi_clamp = ceiling - 0.03;
  const double lo_clamp = 0.02;
  if (config.field_idr_hi > hi_clamp)
    throw DataError(fstr(
        "sim config: field_idr_hi %.3f exceeds achievable IDR ceiling %.3f",
        config.field_idr_hi, hi_clamp));

  // Field latent IDR levels, equally spaced.
  std::vector<double> field_latent(static_cast<std::size_t>(config.n_fields));
  for (int b = 0; b < config.n_fields; ++b) {
    field_latent[static_cast<std::size_t>(b)] =
        config.n_fields == 1
            ? 0.5 * (config.field_idr_lo + config.field_idr_hi)
            : config.field_idr_lo + (config.field_idr_hi - config.field_idr_lo) *
                                        b / (config.n_fields - 1.0);
  }

  for (int b = 0; b < config.n_fields; ++b) {
    FieldRecord f;
    f.field_id = fstr("f%d", b + 1);
    f.size_phds = 20000 + 900.0 * b;
    f.avg_citations = 8.0 + 0.8 * b;
    f.turnaround_months = 4.0 + 0.3 * b;
    corpus.fields.emplace(f.field_id, f);
  }

  // Journals: one single-SC journal per SC for references, and per-field
  // publication journals with 1-3 focal SCs.
  Rng jrng(substream_seed(config.seed, 0));
  for (int i = 0; i < config.sc_count; ++i) {
    JournalRecord j;
    j.journal_id = "jr_" + sc_label(i);
    j.sc_ids = {static_cast<ScId>(i)};
    j.impact_factor = std::round(std::exp(jrng.normal(0.2, 0.4)) * 100.0) / 100.0;
    corpus.journals.emplace(j.journal_id, j);
  }
  const int block_size = config.sc_count / config.n_fields;
  for (int b = 0; b < config.n_fields; ++b) {
    for (int r = 1; r <= 3; ++r) {
      JournalRecord j;
      j.journal_id = fstr("jp_f%d_%d", b + 1, r);
      for (int s = 0; s < r && s < block_size; ++s)
        j.sc_ids.push_back(static_cast<ScId>(b * block_size + s));
      j.impact_factor = std::round(std::exp(jrng.normal(0.3, 0.4)) * 100.0) / 100.0;
      corpus.journals.emplace(j.journal_id, j);
    }
  }

  json persons_truth = json::array();
  double idr_sum = 0;
  std::int64_t idr_count = 0;

  for (int pi = 0; pi < config.n_persons; ++pi) {
    Rng rng(substream_seed(config.seed, static_cast<std::uint64_t>(pi) + 1));
    const int field = pi % config.n_fields;
    const double latent = field_latent[static_cast<std::size_t>(field)];
    const double propensity =
        std::clamp(latent + rng.normal(0.0, config.person_idr_sd), lo_clamp,
                   hi_clamp);

    PersonRecord person;
    person.person_id = fstr("s%04d", pi + 1);
    person.field_id = fstr("f%d", field + 1);
    person.phd_year = config.year_lo - rng.uniform_int(0, 8);
    person.female = rng.bernoulli(0.15) ? 1 : 0;
    person.phd_rank = std::round(rng.uniform() * 400.0) / 100.0 + 1.0;
    person.status = std::floor(rng.uniform() * 80.0);
    corpus.persons.emplace(person.person_id, person);

    std::vector<std::string> last_team;
    int team_counter = 0;
    int paper_count = 0;
    for (int year = config.year_lo; year <= config.year_hi; ++year) {
      const double x =
          std::clamp(propensity + rng.normal(0.0, config.within_person_idr_sd),
                     lo_clamp, hi_clamp);
      const int period = (year - config.year_lo) / 5;
      const double log_rate = config.base_pubs_log +
                              config.beta_idr_productivity * x +
                              config.beta_idr_x_field * x * latent +
                              config.period_drift * period;
      if (log_rate > 4.0)
        throw DataError("sim config: publication log-rate exceeds 4");
      const int n_papers = rng.poisson(std::exp(log_rate));

      for (int k = 0; k < n_papers; ++k) {
        PaperRecord paper;
        paper.paper_id = fstr("p%04d_%d_%02d", pi + 1, year, k + 1);
        paper.year = year;

        // Team: the focal person plus external coauthors; reusing the
        // previous team plants repeat collaborations.
        if (!last_team.empty() && rng.bernoulli(config.repeat_team_rate)) {
          paper.author_ids = last_team;
        } else {
          paper.author_ids = {person.person_id};
          const int n_co = rng.poisson(1.2);
          ++team_counter;
          for (int c = 0; c < n_co; ++c)
            paper.author_ids.push_back(
                fstr("x%04d_%03d_%d", pi + 1, team_counter, c + 1));
          last_team = paper.author_ids;
        }

        const int reach_draw = 1 + rng.uniform_int(0, 2);
        paper.journal_id = fstr("jp_f%d_%d", field + 1, reach_draw);
        paper.focal_scs = corpus.journals.at(paper.journal_id).sc_ids;

        const double t =
            std::clamp(x + rng.normal(0.0, 0.01), lo_clamp, hi_clamp);
        auto mix = target_idr_mix(t, result.similarity, config.refs_per_paper);
        for (ScId sc : mix) {
          paper.ref_journals.push_back("jr_" + sc_label(sc));
          paper.ref_scs.push_back({sc});
        }

        auto props = ref_proportions(paper);
        const double realized = paper_idr(*props, result.similarity, corpus.catalog);
        idr_sum += realized;
        ++idr_count;

        const double disp =
            config.sigma0_dispersion +
            config.gamma_idr_citation_dispersion * realized;
        const double u = rng.normal(-0.5 * disp * disp, disp);
        const double cite_log = config.base_cites_log +
                                config.beta_idr_citation_mean * realized +
                                config.beta_cite_x_field * realized * latent + u;
        paper.citations = rng.poisson(std::exp(std::min(cite_log, 8.0)));

        corpus.papers.push_back(std::move(paper));
        ++paper_count;
      }
    }

    persons_truth.push_back({{"person_id", person.person_id},
                             {"field_id", person.field_id},
                             {"propensity", propensity},
                             {"papers", paper_count}});
  }

  corpus.rebuild_indexes();
  result.realized_mean_idr = idr_count ? idr_sum / idr_count : 0.0;

  json cfg;
  cfg["seed"] = config.seed;
  cfg["persons"] = config.n_persons;
  cfg["fields"] = config.n_fields;
  cfg["year_lo"] = config.year_lo;
  cfg["year_hi"] = config.year_hi;
  cfg["sc_count"] = config.sc_count;
  cfg["refs_per_paper"] = config.refs_per_paper;
  cfg["field_idr_lo"] = config.field_idr_lo;
  cfg["field_idr_hi"] = config.field_idr_hi;
  cfg["person_idr_sd"] = config.person_idr_sd;
  cfg["within_person_idr_sd"] = config.within_person_idr_sd;
  cfg["beta_idr_productivity"] = config.beta_idr_productivity;
  cfg["beta_idr_citation_mean"] = config.beta_idr_citation_mean;
  cfg["gamma_idr_citation_dispersion"] = config.gamma_idr_citation_dispersion;
  cfg["beta_idr_x_field"] = config.beta_idr_x_field;
  cfg["beta_cite_x_field"] = config.beta_cite_x_field;
  cfg["base_pubs_log"] = config.base_pubs_log;
  cfg["base_cites_log"] = config.base_cites_log;
  cfg["sigma0_dispersion"] = config.sigma0_dispersion;
  cfg["repeat_team_rate"] = config.repeat_team_rate;
  cfg["period_drift"] = config.period_drift;
  cfg["within_block_s"] = config.within_block_s;
  cfg["adjacent_block_s"] = config.adjacent_block_s;

  json truth;
  truth["generator"] = "idrkit simgen";
  truth["config"] = cfg;
  truth["field_latent_idr"] = field_latent;
  truth["idr_ceiling"] = ceiling;
  truth["realized_mean_idr"] = result.realized_mean_idr;
  truth["n_papers"] = idr_count;
  truth["persons"] = persons_truth;
  result.ground_truth_json = truth.dump(2) + "\n";
  return result;
}

void write_generated(const GenerateResult& result,
                     const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  CorpusPaths paths;
  paths.papers = out_dir / "papers.jsonl";
  paths.journals = out_dir / "journals.jsonl";
  paths.persons = out_dir / "persons.jsonl";
  paths.fields = out_dir / "fields.jsonl";
  save_corpus(result.corpus, paths);
  save_matrix_file(result.similarity.labels(), result.similarity.values(),
                   out_dir / "similarity.txt");
  std::ofstream truth(out_dir / "ground_truth.json", std::ios::binary);
  if (!truth) throw DataError("cannot write ground_truth.json");
  truth << result.ground_truth_json;
}

}  // namespace idr
