#include <random>
#include <sstream>

#include "doctest.h"
#include "idr/errors.hpp"
#include "idr/metrics.hpp"
#include "test_support.hpp"

using namespace idr;

namespace {

// The three worked articles over the 4x4 fixture, references listed as in
// the source table: Article 1 = SC2,SC1,SC3,SC4,SC1; Article 2 = SC2,SC3x4;
// Article 3 = SC4,SC3x4.
Corpus worked_corpus() {
  Corpus corpus;
  // Keep catalog ids aligned with the fixture's label order.
  for (const char* label : {"SC1", "SC2", "SC3", "SC4"}) corpus.catalog.intern(label);
  corpus.papers.push_back(test::mono_ref_paper(
      corpus.catalog, "art1", 2000, {"SC2", "SC1", "SC3", "SC4", "SC1"}));
  corpus.papers.push_back(test::mono_ref_paper(
      corpus.catalog, "art2", 2000, {"SC2", "SC3", "SC3", "SC3", "SC3"}));
  corpus.papers.push_back(test::mono_ref_paper(
      corpus.catalog, "art3", 2000, {"SC4", "SC3", "SC3", "SC3", "SC3"}));
  corpus.rebuild_indexes();
  return corpus;
}

double weight_of(const RefProportions& props, const ScCatalog& catalog,
                 const std::string& label) {
  const auto id = catalog.find(label);
  REQUIRE(id.has_value());
  for (const auto& [sc, w] : props.weights)
    if (sc == *id) return w;
  return 0.0;
}

}  // namespace

TEST_CASE("reference proportions of the first worked article") {
  Corpus corpus = worked_corpus();
  auto props = ref_proportions(*corpus.find_paper("art1"));
  REQUIRE(props.has_value());
  CHECK(props->total_refs == 5);
  CHECK(props->distinct_scs() == 4);
  CHECK(weight_of(*props, corpus.catalog, "SC1") == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(weight_of(*props, corpus.catalog, "SC2") == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(weight_of(*props, corpus.catalog, "SC3") == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(weight_of(*props, corpus.catalog, "SC4") == doctest::Approx(0.2).epsilon(1e-15));
  double sum = 0;
  for (const auto& [sc, w] : props->weights) sum += w;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("proportions: all references in one SC") {
  Corpus corpus;
  auto paper = test::mono_ref_paper(corpus.catalog, "p", 2000, {"A", "A", "A", "A"});
  auto props = ref_proportions(paper);
  REQUIRE(props.has_value());
  CHECK(props->distinct_scs() == 1);
  CHECK(props->weights[0].second == 1.0);
}

TEST_CASE("proportions: fractional weights for multi-SC journals") {
  // One reference to a 2-SC journal {A,B} and one to {B}: p = (0.25, 0.75).
  Corpus corpus;
  const ScId a = corpus.catalog.intern("A");
  const ScId b = corpus.catalog.intern("B");
  PaperRecord paper;
  paper.paper_id = "p";
  paper.author_ids = {"x"};
  paper.ref_scs = {{a, b}, {b}};
  auto props = ref_proportions(paper);
  REQUIRE(props.has_value());
  CHECK(weight_of(*props, corpus.catalog, "A") == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(weight_of(*props, corpus.catalog, "B") == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("no references means undefined proportions, not zero") {
  PaperRecord paper;
  paper.paper_id = "p";
  CHECK(!ref_proportions(paper).has_value());
}

TEST_CASE("worked articles match the exact arithmetic and the oracle") {
  Corpus corpus = worked_corpus();
  auto sim = test::four_sc_similarity();

  // Exact values of 1 - sum s_ij p_i p_j under the single-count convention;
  // the in-test dense oracle recomputes them independently.
  const struct {
    const char* id;
    double expect;
  } cases[] = {
      {"art1", 0.68538},
      {"art2", 0.263952},
      {"art3", 0.319824},
  };
  for (const auto& c : cases) {
    const auto* paper = corpus.find_paper(c.id);
    auto props = ref_proportions(*paper);
    REQUIRE(props.has_value());
    const double got = paper_idr(*props, sim, corpus.catalog);
    CHECK(got == doctest::Approx(c.expect).epsilon(1e-12));
    CHECK(got ==
          doctest::Approx(test::naive_idr(*paper, sim, corpus.catalog)).epsilon(1e-13));
  }
}

TEST_CASE("single-SC paper scores exactly zero") {
  Corpus corpus;
  auto paper = test::mono_ref_paper(corpus.catalog, "p", 2000, {"A", "A", "A"});
  auto sim = SimilarityMatrix({"A"}, Eigen::MatrixXd::Identity(1, 1), "one",
                              SimProvenance::Fixture);
  auto props = ref_proportions(paper);
  CHECK(paper_idr(*props, sim, corpus.catalog) == 0.0);
}

TEST_CASE("referenced SC missing from the matrix is an error") {
  Corpus corpus = worked_corpus();
  auto small = SimilarityMatrix({"SC1"}, Eigen::MatrixXd::Identity(1, 1), "one",
                                SimProvenance::Fixture);
  auto props = ref_proportions(*corpus.find_paper("art1"));
  CHECK_THROWS_WITH_AS(paper_idr(*props, small, corpus.catalog),
                       doctest::Contains("missing from similarity"), DataError);
}

TEST_CASE("IDR bounds and the zero law over random instances") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> d_k(1, 9), d_refs(1, 40);
  for (int trial = 0; trial < 2000; ++trial) {
    const int k = d_k(rng);
    auto sim = test::random_similarity(rng, k);
    Corpus corpus;
    for (int i = 0; i < k; ++i) corpus.catalog.intern("R" + std::to_string(i));
    std::vector<std::string> refs;
    std::uniform_int_distribution<int> d_sc(0, k - 1);
    const int n = d_refs(rng);
    for (int r = 0; r < n; ++r) refs.push_back("R" + std::to_string(d_sc(rng)));
    auto paper = test::mono_ref_paper(corpus.catalog, "p", 2000, refs);
    auto props = ref_proportions(paper);
    const double idr = paper_idr(*props, sim, corpus.catalog);
    CHECK(idr >= 0.0);
    CHECK(idr < 1.0);
    if (props->distinct_scs() == 1) CHECK(idr == 0.0);
    if (props->distinct_scs() > 1) CHECK(idr > 0.0);
  }
}

TEST_CASE("lower similarity never lowers IDR (monotonicity)") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 400; ++trial) {
    const double s_hi = unit(rng);
    const double s_lo = unit(rng) * s_hi;
    const double w = unit(rng);
    Corpus corpus;
    corpus.catalog.intern("A");
    corpus.catalog.intern("B");
    PaperRecord paper;
    paper.paper_id = "p";
    const int m = 1 + static_cast<int>(w * 18);
    for (int i = 0; i < m; ++i) paper.ref_scs.push_back({0});
    for (int i = m; i < 20; ++i) paper.ref_scs.push_back({1});
    auto props = ref_proportions(paper);

    auto make = [&](double s) {
      Eigen::MatrixXd v(2, 2);
      v << 1, s, s, 1;
      return SimilarityMatrix({"A", "B"}, v, "x", SimProvenance::Fixture);
    };
    const double idr_hi_s = paper_idr(*props, make(s_hi), corpus.catalog);
    const double idr_lo_s = paper_idr(*props, make(s_lo), corpus.catalog);
    CHECK(idr_lo_s >= idr_hi_s);
  }
}

TEST_CASE("IDR is invariant under duplicating the reference list") {
  Corpus corpus = worked_corpus();
  auto sim = test::four_sc_similarity();
  for (const char* id : {"art1", "art2", "art3"}) {
    const auto* paper = corpus.find_paper(id);
    PaperRecord doubled = *paper;
    doubled.ref_scs.insert(doubled.ref_scs.end(), paper->ref_scs.begin(),
                           paper->ref_scs.end());
    const double a = paper_idr(*ref_proportions(*paper), sim, corpus.catalog);
    const double b = paper_idr(*ref_proportions(doubled), sim, corpus.catalog);
    CHECK(a == doctest::Approx(b).epsilon(1e-14));
  }
}

TEST_CASE("IDR is invariant under permutation of SC indices") {
  std::mt19937_64 rng(29);
  const int k = 6;
  auto sim = test::random_similarity(rng, k);
  Corpus corpus;
  for (int i = 0; i < k; ++i) corpus.catalog.intern("R" + std::to_string(i));
  auto paper = test::mono_ref_paper(corpus.catalog, "p", 2000,
                                    {"R0", "R1", "R1", "R3", "R5", "R5"});
  const double base = paper_idr(*ref_proportions(paper), sim, corpus.catalog);

  // Permute rows/columns together with the label list.
  std::vector<int> perm = {3, 0, 5, 1, 4, 2};
  Eigen::MatrixXd permuted(k, k);
  std::vector<std::string> labels(k);
  for (int i = 0; i < k; ++i) {
    labels[perm[i]] = sim.labels()[i];
    for (int j = 0; j < k; ++j) permuted(perm[i], perm[j]) = sim.at(i, j);
  }
  auto sim2 = SimilarityMatrix(labels, permuted, "perm", SimProvenance::Fixture);
  CHECK(paper_idr(*ref_proportions(paper), sim2, corpus.catalog) ==
        doctest::Approx(base).epsilon(1e-14));
}

TEST_CASE("variety is the union of referenced SC sets") {
  Corpus corpus;
  auto p1 = test::mono_ref_paper(corpus.catalog, "p1", 2000, {"A", "B"});
  auto p2 = test::mono_ref_paper(corpus.catalog, "p2", 2001, {"B", "C"});
  CHECK(variety({&p1, &p2}) == 3);

  auto solo = test::mono_ref_paper(corpus.catalog, "p3", 2001, {"A"});
  CHECK(variety({&solo}) == 1);

  PaperRecord empty;
  CHECK(variety({&empty}) == 0);
}

TEST_CASE("variety on a 10-paper fixture matches a set-union oracle") {
  std::mt19937_64 rng(3);
  Corpus corpus;
  std::vector<PaperRecord> papers;
  std::uniform_int_distribution<int> d_sc(0, 14), d_n(1, 7);
  std::set<std::string> oracle;
  for (int i = 0; i < 10; ++i) {
    std::vector<std::string> refs;
    const int n = d_n(rng);
    for (int r = 0; r < n; ++r) {
      refs.push_back("S" + std::to_string(d_sc(rng)));
      oracle.insert(refs.back());
    }
    papers.push_back(
        test::mono_ref_paper(corpus.catalog, "p" + std::to_string(i), 2000, refs));
  }
  std::vector<const PaperRecord*> ptrs;
  for (const auto& p : papers) ptrs.push_back(&p);
  CHECK(variety(ptrs) == static_cast<int>(oracle.size()));
}

TEST_CASE("multidisciplinarity distinguishes pooled from per-paper scores") {
  // Two mono-SC papers over orthogonal SCs with equal reference counts:
  // per-paper IDR is 0 but the pooled oeuvre scores 1 - (0.25+0.25) = 0.5.
  Corpus corpus;
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2, 2);
  auto sim = SimilarityMatrix({"A", "B"}, s, "orth", SimProvenance::Fixture);
  auto p1 = test::mono_ref_paper(corpus.catalog, "p1", 2000, {"A", "A", "A"});
  auto p2 = test::mono_ref_paper(corpus.catalog, "p2", 2001, {"B", "B", "B"});

  CHECK(paper_idr(*ref_proportions(p1), sim, corpus.catalog) == 0.0);
  CHECK(paper_idr(*ref_proportions(p2), sim, corpus.catalog) == 0.0);

  auto multi = multidisciplinarity({&p1, &p2}, sim, corpus.catalog);
  REQUIRE(multi.has_value());
  CHECK(*multi == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("multidisciplinarity of a one-paper oeuvre equals that paper's IDR") {
  Corpus corpus = worked_corpus();
  auto sim = test::four_sc_similarity();
  const auto* paper = corpus.find_paper("art1");
  auto multi = multidisciplinarity({paper}, sim, corpus.catalog);
  REQUIRE(multi.has_value());
  CHECK(*multi ==
        doctest::Approx(paper_idr(*ref_proportions(*paper), sim, corpus.catalog))
            .epsilon(1e-15));
}

TEST_CASE("multidisciplinarity: pooled single SC scores zero; no refs undefined") {
  Corpus corpus;
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(1, 1);
  auto sim = SimilarityMatrix({"A"}, eye, "one", SimProvenance::Fixture);
  auto p1 = test::mono_ref_paper(corpus.catalog, "p1", 2000, {"A", "A"});
  auto p2 = test::mono_ref_paper(corpus.catalog, "p2", 2001, {"A"});
  CHECK(*multidisciplinarity({&p1, &p2}, sim, corpus.catalog) == 0.0);

  PaperRecord bare;
  CHECK(!multidisciplinarity({&bare}, sim, corpus.catalog).has_value());
}

TEST_CASE("reach counts focal SCs") {
  Corpus corpus;
  PaperRecord p;
  p.paper_id = "p";
  p.focal_scs = {corpus.catalog.intern("Sociology")};
  CHECK(reach(p) == 1);
  for (const char* l : {"B", "C", "D", "E", "F"})
    p.focal_scs.push_back(corpus.catalog.intern(l));
  CHECK(reach(p) == 6);

  PaperRecord none;
  none.paper_id = "q";
  CHECK_THROWS_AS(reach(none), DataError);
}

TEST_CASE("mean reach of a fixture matches the arithmetic oracle") {
  Corpus corpus;
  std::vector<int> reaches = {1, 3, 2, 6, 1};
  double total = 0;
  std::vector<PaperRecord> papers;
  for (std::size_t i = 0; i < reaches.size(); ++i) {
    PaperRecord p;
    p.paper_id = "p" + std::to_string(i);
    for (int r = 0; r < reaches[i]; ++r)
      p.focal_scs.push_back(corpus.catalog.intern("S" + std::to_string(i) + "_" +
                                                  std::to_string(r)));
    total += reaches[i];
    papers.push_back(p);
  }
  double m = 0;
  for (const auto& p : papers) m += reach(p);
  m /= static_cast<double>(papers.size());
  CHECK(m == doctest::Approx(total / 5.0).epsilon(1e-15));
}

TEST_CASE("score_corpus reproduces the worked articles and flags gaps") {
  Corpus corpus = worked_corpus();
  // A paper without references and one without focal SCs.
  auto no_refs = test::mono_ref_paper(corpus.catalog, "bare", 2000, {});
  no_refs.focal_scs = {corpus.catalog.intern("SC1")};
  corpus.papers.push_back(no_refs);
  for (auto& p : corpus.papers)
    if (p.focal_scs.empty()) p.focal_scs = {corpus.catalog.intern("SC1")};
  corpus.rebuild_indexes();

  MatrixRegistry registry;
  registry.emplace(2000, test::four_sc_similarity());
  auto scores = score_corpus(corpus, registry);
  CHECK(scores.size() == 4);
  CHECK(*scores.at("art1").idr == doctest::Approx(0.68538).epsilon(1e-12));
  CHECK(*scores.at("art2").idr == doctest::Approx(0.263952).epsilon(1e-12));
  CHECK(*scores.at("art3").idr == doctest::Approx(0.319824).epsilon(1e-12));
  CHECK(!scores.at("bare").idr.has_value());
  CHECK(scores.at("bare").flags ==
        std::vector<std::string>{"no-references"});
}

TEST_CASE("empty corpus scores to an empty map") {
  Corpus corpus;
  corpus.catalog.intern("A");
  MatrixRegistry registry;
  registry.emplace(2000, SimilarityMatrix({"A"}, Eigen::MatrixXd::Identity(1, 1),
                                          "one", SimProvenance::Fixture));
  CHECK(score_corpus(corpus, registry).empty());
}

TEST_CASE("sparse scoring equals the dense double-loop oracle on random papers") {
  std::mt19937_64 rng(101);
  const int k = 50;
  auto sim = test::random_similarity(rng, k);
  Corpus corpus;
  for (int i = 0; i < k; ++i) corpus.catalog.intern("R" + std::to_string(i));
  std::uniform_int_distribution<int> d_sc(0, k - 1), d_refs(1, 60);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> refs;
    const int n = d_refs(rng);
    for (int r = 0; r < n; ++r) refs.push_back("R" + std::to_string(d_sc(rng)));
    auto paper = test::mono_ref_paper(corpus.catalog, "p", 2000, refs);
    const double sparse = paper_idr(*ref_proportions(paper), sim, corpus.catalog);
    const double dense = test::naive_idr(paper, sim, corpus.catalog);
    CHECK(sparse == doctest::Approx(dense).epsilon(1e-12));
  }
}

TEST_CASE("scores.csv format and round trip") {
  Corpus corpus = worked_corpus();
  for (auto& p : corpus.papers) p.focal_scs = {corpus.catalog.intern("SC1")};
  corpus.rebuild_indexes();
  MatrixRegistry registry;
  registry.emplace(2000, test::four_sc_similarity());
  auto scores = score_corpus(corpus, registry);

  std::ostringstream out;
  write_scores_csv(scores, out);
  const std::string text = out.str();
  CHECK(text.find("paper_id,year,idr,reach,ref_count,distinct_ref_scs\n") == 0);
  CHECK(text.find("art1,2000,0.685380,1,5,4") != std::string::npos);
  CHECK(text.find("art2,2000,0.263952,1,5,2") != std::string::npos);

  std::istringstream in(text);
  auto parsed = read_scores_csv(in);
  CHECK(parsed.size() == scores.size());
  CHECK(*parsed.at("art3").idr == doctest::Approx(0.319824).epsilon(1e-9));
}
