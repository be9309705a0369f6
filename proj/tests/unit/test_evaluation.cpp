#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "hsgns/errors.hpp"
#include "hsgns/evaluation.hpp"
#include "test_support.hpp"

namespace hsgns {
namespace {

using geometry::HyperboloidPoint;
using geometry::MinkowskiVector;

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> w;
  for (std::size_t i = 0; i < n; ++i) w.push_back("w" + std::to_string(i));
  return w;
}

EmbeddingModel hyperbolic_model(const std::vector<HyperboloidPoint>& points,
                                std::vector<std::string> words = {}) {
  if (words.empty()) words = names(points.size());
  const std::size_t width = points.front().size();
  EmbeddingMatrix m(Geometry::hyperbolic, Layer::alpha, points.size(), width);
  for (std::size_t i = 0; i < points.size(); ++i)
    std::copy(points[i].coords().begin(), points[i].coords().end(), m.row(i).begin());
  return EmbeddingModel(std::move(words), std::move(m), 3.0, true);
}

EmbeddingModel euclidean_model(const std::vector<std::vector<double>>& rows,
                               std::vector<std::string> words = {}) {
  if (words.empty()) words = names(rows.size());
  EmbeddingMatrix m(Geometry::euclidean, Layer::alpha, rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  return EmbeddingModel(std::move(words), std::move(m), 0.0, false);
}

HyperboloidPoint on_axis(std::size_t n, double t) {
  std::vector<double> x(n + 1, 0.0);
  x[0] = std::sinh(t);
  x[n] = std::cosh(t);
  return HyperboloidPoint::from_coords(MinkowskiVector(x));
}

double dist(const HyperboloidPoint& a, const HyperboloidPoint& b) {
  return test::big_distance(a.coords(), b.coords());
}

// ---------------------------------------------------------------------------
// Spearman

// Average ranks by counting, independent of any sorting.
std::vector<double> oracle_ranks(const std::vector<double>& xs) {
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double below = 0, equal = 0;
    for (double x : xs) {
      below += x < xs[i];
      equal += x == xs[i];
    }
    r[i] = below + (equal + 1.0) / 2.0;
  }
  return r;
}

double oracle_spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto rx = oracle_ranks(xs), ry = oracle_ranks(ys);
  const test::Big n = static_cast<double>(xs.size());
  test::Big mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  test::Big sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return static_cast<double>(sxy / boost::multiprecision::sqrt(sxx * syy));
}

TEST(Spearman, Examples) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> rev = {10, 8, 6, 4, 2};
  EXPECT_DOUBLE_EQ(spearman(x, x), 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, rev), -1.0);
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{1, 3, 2, 4, 5}), 0.9);
}

TEST(Spearman, AverageRanks) {
  EXPECT_EQ(average_ranks(std::vector<double>{3, 1, 3, 2}), (std::vector<double>{3.5, 1, 3.5, 2}));
  EXPECT_EQ(average_ranks(std::vector<double>{5, 5, 5}), (std::vector<double>{2, 2, 2}));
}

TEST(Spearman, MatchesBruteForceOracleWithTies) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> small(0, 6);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = t < 100 ? 20 : 2 + t % 50;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = small(rng);
      ys[i] = t % 2 ? small(rng) : normal(rng);
    }
    if (std::all_of(xs.begin(), xs.end(), [&](double v) { return v == xs[0]; })) continue;
    if (std::all_of(ys.begin(), ys.end(), [&](double v) { return v == ys[0]; })) continue;
    EXPECT_EQ(average_ranks(xs), oracle_ranks(xs));
    EXPECT_NEAR(spearman(xs, ys), oracle_spearman(xs, ys), 1e-12);
  }
}

TEST(Spearman, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 rng(18);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> xs(30), ys(30);
    for (auto& v : xs) v = normal(rng);
    for (auto& v : ys) v = normal(rng);
    const double r = spearman(xs, ys);
    std::vector<double> fx(xs.size()), fy(ys.size());
    std::transform(xs.begin(), xs.end(), fx.begin(), [](double v) { return std::exp(3 * v) - 7; });
    std::transform(ys.begin(), ys.end(), fy.begin(), [](double v) { return std::atan(v); });
    EXPECT_DOUBLE_EQ(spearman(fx, fy), r);
    EXPECT_GE(r, -1.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(Spearman, Errors) {
  EXPECT_THROW(spearman(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1}), std::invalid_argument);
  EXPECT_THROW(spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
               std::domain_error);
}

// ---------------------------------------------------------------------------
// Similarity

TEST(ModelSimilarity, SelfSimilarity) {
  std::mt19937_64 rng(1);
  std::vector<HyperboloidPoint> pts;
  for (int i = 0; i < 4; ++i) pts.push_back(test::random_point(3, 2.0, rng));
  const auto h = hyperbolic_model(pts);
  for (WordId i = 0; i < 4; ++i) EXPECT_NEAR(model_similarity(h, i, i), -1.0, 1e-12);

  const auto e = euclidean_model({{1, 2, 3}, {-1, 0, 2}});
  EXPECT_NEAR(model_similarity(e, 0, 0), 1.0, 1e-15);
  EXPECT_NEAR(model_similarity(e, 0, 1), 5.0 / (std::sqrt(14.0) * std::sqrt(5.0)), 1e-15);
}

TEST(ModelSimilarity, RankingMatchesNegativeDistance) {
  std::mt19937_64 rng(2);
  std::vector<HyperboloidPoint> pts;
  for (int i = 0; i < 40; ++i) pts.push_back(test::random_point(4, 3.0, rng));
  const auto m = hyperbolic_model(pts);
  for (WordId q = 0; q < 5; ++q) {
    std::vector<WordId> by_sim(40), by_dist(40);
    std::iota(by_sim.begin(), by_sim.end(), 0);
    std::iota(by_dist.begin(), by_dist.end(), 0);
    std::stable_sort(by_sim.begin(), by_sim.end(), [&](WordId a, WordId b) {
      return model_similarity(m, q, a) > model_similarity(m, q, b);
    });
    std::stable_sort(by_dist.begin(), by_dist.end(), [&](WordId a, WordId b) {
      return dist(pts[q], pts[a]) < dist(pts[q], pts[b]);
    });
    EXPECT_EQ(by_sim, by_dist);
  }
}

TEST(ModelSimilarity, StringLookupLowercasesAndReportsMissing) {
  const auto m = euclidean_model({{1, 0}, {0, 1}}, {"paris", "france"});
  EXPECT_TRUE(model_similarity(m, "Paris", "FRANCE").has_value());
  EXPECT_FALSE(model_similarity(m, "paris", "berlin").has_value());
}

TEST(EvalSimilarity, HandComputedFixture) {
  // Points on one geodesic at these offsets; similarity = -cosh(|ti - tj|).
  const double t[] = {0.0, 0.5, 1.2, 2.0, 3.5};
  std::vector<HyperboloidPoint> pts;
  for (double x : t) pts.push_back(on_axis(2, x));
  const auto m = hyperbolic_model(pts);
  // Distances 0.5, 1.2, 1.5, 2.0, 2.3 give model ranks 5 4 3 2 1; the human
  // scores rank 5 3 4 2 1, so rho = 1 - 6*2/(5*24) = 0.9.
  const SimilarityDataset ds{"fixture",
                             {{"w0", "w1", 9}, {"w0", "w2", 7}, {"w1", "w3", 8},
                              {"w0", "w3", 3}, {"w2", "w4", 1}, {"w0", "zzz", 5}}};
  const auto report = eval_similarity(m, std::span(&ds, 1));
  ASSERT_EQ(report.datasets.size(), 1u);
  const auto& r = report.datasets[0];
  EXPECT_EQ(r.pairs_total, 6u);
  EXPECT_EQ(r.pairs_scored, 5u);
  EXPECT_NEAR(r.coverage, 5.0 / 6.0, 1e-15);
  ASSERT_TRUE(r.spearman.has_value());
  EXPECT_NEAR(*r.spearman, 0.9, 1e-12);
  EXPECT_NEAR(*report.weighted_average, 0.9, 1e-12);
}

TEST(EvalSimilarity, WeightedAverage) {
  std::vector<HyperboloidPoint> pts;
  for (int i = 0; i < 6; ++i) pts.push_back(on_axis(2, 0.3 * i));
  const auto m = hyperbolic_model(pts);
  // Perfect agreement on 4 pairs, perfect disagreement on 2.
  const std::vector<SimilarityDataset> ds = {
      {"agree", {{"w0", "w1", 4}, {"w0", "w2", 3}, {"w0", "w3", 2}, {"w0", "w4", 1}}},
      {"disagree", {{"w0", "w1", 1}, {"w0", "w5", 2}}},
      {"unknown", {{"x", "y", 1}, {"y", "z", 2}}},
  };
  const auto report = eval_similarity(m, ds);
  EXPECT_DOUBLE_EQ(*report.datasets[0].spearman, 1.0);
  EXPECT_DOUBLE_EQ(*report.datasets[1].spearman, -1.0);
  EXPECT_FALSE(report.datasets[2].spearman.has_value());
  EXPECT_EQ(report.datasets[2].coverage, 0.0);
  EXPECT_NEAR(*report.weighted_average, (4.0 - 2.0) / 6.0, 1e-15);

  // Equal correlations average to themselves.
  const std::vector<SimilarityDataset> same = {ds[0], ds[0], ds[0]};
  EXPECT_DOUBLE_EQ(*eval_similarity(m, same).weighted_average, 1.0);

  const std::vector<SimilarityDataset> none = {ds[2]};
  EXPECT_FALSE(eval_similarity(m, none).weighted_average.has_value());
}

TEST(EvalSimilarity, Deterministic) {
  std::mt19937_64 rng(3);
  std::vector<HyperboloidPoint> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(test::random_point(5, 2.0, rng));
  const auto m = hyperbolic_model(pts);
  SimilarityDataset ds{"r", {}};
  std::uniform_int_distribution<int> w(0, 19);
  std::uniform_real_distribution<double> s(0, 10);
  for (int i = 0; i < 50; ++i)
    ds.pairs.push_back({"w" + std::to_string(w(rng)), "w" + std::to_string(w(rng)), s(rng)});
  const auto a = eval_similarity(m, std::span(&ds, 1));
  const auto b = eval_similarity(m, std::span(&ds, 1));
  EXPECT_EQ(*a.weighted_average, *b.weighted_average);
}

class DatasetFiles : public ::testing::Test {
 protected:
  std::filesystem::path write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }
  test::TempDir dir_;
};

TEST_F(DatasetFiles, SimilarityLoader) {
  const auto p = write("ws.tsv", "# comment\n\nTiger\tcat\t7.35\nbook\tpaper\t7.46\n");
  const auto ds = load_similarity_dataset(p);
  EXPECT_EQ(ds.name, "ws");
  ASSERT_EQ(ds.pairs.size(), 2u);
  EXPECT_EQ(ds.pairs[0].first, "Tiger");
  EXPECT_EQ(ds.pairs[1].score, 7.46);
}

TEST_F(DatasetFiles, SimilarityLoaderReportsLineNumbers) {
  const auto expect_line = [&](const std::string& text, const std::string& where) {
    const auto p = write("bad.tsv", text);
    try {
      load_similarity_dataset(p);
      FAIL() << "no error for " << text;
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find(where), std::string::npos) << e.what();
    }
  };
  expect_line("a\tb\t1\n# x\na b 2\n", "bad.tsv:3:");
  expect_line("a\tb\tnope\n", "bad.tsv:1:");
  expect_line("a\tb\t1\t2\n", "bad.tsv:1:");
  expect_line("a\tb\tinf\n", "bad.tsv:1:");
  expect_line("# only comments\n", "no word pairs");
  EXPECT_THROW(load_similarity_dataset(dir_ / "missing.tsv"), DataError);
}

TEST_F(DatasetFiles, AnalogyLoader) {
  const auto p = write("q.txt", ": capital\nAthens Greece Baghdad Iraq\n\n: family\nboy girl "
                                "brother sister\nking queen man woman\n");
  const auto ds = load_analogy_dataset(p);
  ASSERT_EQ(ds.categories.size(), 2u);
  EXPECT_EQ(ds.categories[0].name, "capital");
  EXPECT_EQ(ds.categories[1].items.size(), 2u);
  EXPECT_EQ(ds.categories[1].items[1].d, "woman");
  EXPECT_EQ(ds.size(), 3u);

  const auto bad = write("bad.txt", ": c\na b c d\na b c\n");
  try {
    load_analogy_dataset(bad);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.txt:3:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_analogy_dataset(write("h.txt", "a b c d\n")), DataError);
}

// ---------------------------------------------------------------------------
// Analogy targets

TEST(AnalogyTarget, DegenerateCases) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    const auto a = test::random_point(3, 2.0, rng);
    const auto b = test::random_point(3, 2.0, rng);
    const auto c = test::random_point(3, 2.0, rng);
    EXPECT_LE(dist(analogy_target_Z(a, a, c), c), 1e-12);
    EXPECT_LE(dist(analogy_target_Zprime(a, a, c), c), 1e-12);
    EXPECT_LE(dist(analogy_target_Z(a, b, a), b), 1e-8);
  }
}

TEST(AnalogyTarget, ZPreservesRelationLength) {
  std::mt19937_64 rng(5);
  for (std::size_t n : {2u, 5u, 20u}) {
    for (int t = 0; t < 100; ++t) {
      const auto a = test::random_point(n, 2.0, rng);
      const auto b = test::random_point(n, 2.0, rng);
      const auto c = test::random_point(n, 2.0, rng);
      const auto z = analogy_target_Z(a, b, c);
      EXPECT_LE(std::abs(test::big_dot(z.coords(), z.coords()) + 1.0), 1e-9);
      EXPECT_NEAR(dist(c, z), dist(a, b), 1e-8);
      const auto zp = analogy_target_Zprime(a, b, c);
      EXPECT_NEAR(dist(b, zp), dist(a, c), 1e-8);
    }
  }
}

TEST(AnalogyTarget, CollinearSensesCoincide) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    const auto base = test::random_point(4, 1.0, rng);
    const auto dir = test::random_tangent(base, 1.0, rng);
    const auto at = [&](double s) {
      std::vector<double> v(dir.coords().begin(), dir.coords().end());
      for (double& x : v) x *= s;
      return geometry::exp_map(geometry::TangentVector(base, MinkowskiVector(v)));
    };
    const double sa = pos(rng), sb = pos(rng), sc = pos(rng);
    const auto z = analogy_target_Z(at(sa), at(sb), at(sc));
    const auto zp = analogy_target_Zprime(at(sa), at(sb), at(sc));
    EXPECT_LE(dist(z, zp), 1e-8);
    EXPECT_LE(dist(z, at(sc + sb - sa)), 1e-8);
  }
}

TEST(AnalogyTarget, GenericSensesDiffer) {
  std::mt19937_64 rng(7);
  int distinct = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const auto a = test::random_point(5, 2.0, rng);
    const auto b = test::random_point(5, 2.0, rng);
    const auto c = test::random_point(5, 2.0, rng);
    distinct += dist(analogy_target_Z(a, b, c), analogy_target_Zprime(a, b, c)) > 1e-6;
  }
  EXPECT_GE(distinct, trials * 99 / 100);
}

TEST(AnalogyTarget, EuclideanExamples) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  const auto unit = [](std::vector<double> v) {
    double s = 0;
    for (double x : v) s += x * x;
    for (double& x : v) x /= std::sqrt(s);
    return v;
  };
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a(6), b(6), c(6);
    for (auto* v : {&a, &b, &c})
      for (double& x : *v) x = 3 * normal(rng);
    const auto ab = analogy_target_euclidean(a, a, c);
    const auto ac = analogy_target_euclidean(a, b, a);
    const auto uc = unit(c), ub = unit(b);
    for (std::size_t i = 0; i < 6; ++i) {
      EXPECT_NEAR(ab[i], uc[i], 1e-15);
      EXPECT_NEAR(ac[i], ub[i], 1e-15);
    }
    // Z = Exp_C(B - A) and Z' = Exp_B(C - A) are the same bits.
    EXPECT_EQ(analogy_target_euclidean(a, b, c), analogy_target_euclidean(a, c, b));
  }
}

// ---------------------------------------------------------------------------
// Nearest neighbours

std::vector<WordId> oracle_order(const EmbeddingModel& m, std::span<const double> q) {
  std::vector<WordId> ids(m.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<double> key(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.geometry() == Geometry::hyperbolic) {
      key[i] = test::big_distance(q, m.vector(i));
    } else {
      double dot = 0, nq = 0, nv = 0;
      for (std::size_t j = 0; j < q.size(); ++j) {
        dot += q[j] * m.vector(i)[j];
        nq += q[j] * q[j];
        nv += m.vector(i)[j] * m.vector(i)[j];
      }
      key[i] = -dot / std::sqrt(nq * nv);
    }
  }
  std::stable_sort(ids.begin(), ids.end(), [&](WordId a, WordId b) { return key[a] < key[b]; });
  return ids;
}

TEST(NearestNeighbors, MatchesFullSortOnFixture) {
  std::mt19937_64 rng(9);
  std::vector<HyperboloidPoint> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(test::random_point(3, 2.5, rng));
  const auto m = hyperbolic_model(pts);
  for (int t = 0; t < 20; ++t) {
    const auto q = test::random_point(3, 2.5, rng);
    const auto order = oracle_order(m, q.coords());
    const auto nn = nearest_neighbors(m, q.coords(), 10);
    ASSERT_EQ(nn.size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) {
      EXPECT_EQ(nn[i].id, order[i]);
      EXPECT_NEAR(nn[i].value, dist(q, pts[static_cast<std::size_t>(order[i])]), 1e-9);
    }
    const auto top3 = nearest_neighbors(m, q.coords(), 3);
    ASSERT_EQ(top3.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(top3[i].id, order[i]);
  }

  std::vector<std::vector<double>> rows(10, std::vector<double>(4));
  std::normal_distribution<double> normal;
  for (auto& r : rows)
    for (double& x : r) x = normal(rng);
  const auto e = euclidean_model(rows);
  std::vector<double> q(4);
  for (double& x : q) x = normal(rng);
  const auto order = oracle_order(e, q);
  const auto nn = nearest_neighbors(e, q, 10);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(nn[i].id, order[i]);
  EXPECT_GE(nn[0].value, nn[9].value);
}

TEST(NearestNeighbors, SelfExclusionTiesAndShortVocabulary) {
  std::vector<HyperboloidPoint> pts = {on_axis(2, 0.0), on_axis(2, 1.0), on_axis(2, 1.0),
                                       on_axis(2, -0.5)};
  const auto m = hyperbolic_model(pts);
  const auto self = nearest_neighbors(m, m.vector(0), 1);
  ASSERT_EQ(self.size(), 1u);
  EXPECT_EQ(self[0].id, 0);
  EXPECT_EQ(self[0].value, 0.0);

  const WordId ex[] = {0};
  const auto other = nearest_neighbors(m, m.vector(0), 1, ex);
  EXPECT_EQ(other[0].id, 3);

  // Words 1 and 2 coincide: the lower index comes first.
  const WordId ex3[] = {3};
  const auto tie = nearest_neighbors(m, m.vector(0), 3, ex3);
  ASSERT_EQ(tie.size(), 3u);
  EXPECT_EQ(tie[1].id, 1);
  EXPECT_EQ(tie[2].id, 2);

  const auto all = nearest_neighbors(m, m.vector(0), 50, ex);
  EXPECT_EQ(all.size(), 3u);
  EXPECT_TRUE(nearest_neighbors(m, m.vector(0), 0).empty());
  const WordId everything[] = {0, 1, 2, 3};
  EXPECT_TRUE(nearest_neighbors(m, m.vector(0), 2, everything).empty());
}

// ---------------------------------------------------------------------------
// eval_analogy

TEST(EvalAnalogy, TargetPlacedAtZScoresPerfectly) {
  std::mt19937_64 rng(10);
  std::vector<HyperboloidPoint> pts;
  std::vector<std::string> words;
  AnalogyDataset ds{{{"fixture", {}}}};
  for (int i = 0; i < 5; ++i) {
    const auto a = test::random_point(4, 2.0, rng);
    const auto b = test::random_point(4, 2.0, rng);
    const auto c = test::random_point(4, 2.0, rng);
    const auto d = analogy_target_Z(a, b, c);
    for (const auto* p : {&a, &b, &c, &d}) pts.push_back(*p);
    const std::string s = std::to_string(i);
    for (const char* role : {"a", "b", "c", "d"}) words.push_back(role + s);
    ds.categories[0].items.push_back({"A" + s, "B" + s, "C" + s, "D" + s});
  }
  ds.categories[0].items.push_back({"a0", "b0", "c0", "missing"});
  const auto m = hyperbolic_model(pts, words);

  const auto z = eval_analogy(m, ds, AnalogyVariant::z);
  EXPECT_EQ(z.total, 6u);
  EXPECT_EQ(z.scored, 5u);
  EXPECT_EQ(z.correct, 5u);
  ASSERT_TRUE(z.accuracy.has_value());
  EXPECT_EQ(*z.accuracy, 1.0);
  EXPECT_NEAR(z.coverage, 5.0 / 6.0, 1e-15);
  ASSERT_EQ(z.categories.size(), 1u);
  EXPECT_EQ(*z.categories[0].accuracy, 1.0);

  const auto zp = eval_analogy(m, ds, AnalogyVariant::zprime);
  EXPECT_LE(*zp.accuracy, *z.accuracy);
  EXPECT_THROW(eval_analogy(m, ds, AnalogyVariant::euclidean), std::invalid_argument);
}

TEST(EvalAnalogy, AllOutOfVocabulary) {
  const auto m = euclidean_model({{1, 0}, {0, 1}});
  const AnalogyDataset ds{{{"c", {{"x", "y", "z", "w"}}}}};
  const auto r = eval_analogy(m, ds, AnalogyVariant::euclidean);
  EXPECT_EQ(r.scored, 0u);
  EXPECT_EQ(r.coverage, 0.0);
  EXPECT_FALSE(r.accuracy.has_value());
  EXPECT_FALSE(r.categories[0].accuracy.has_value());
}

TEST(EvalAnalogy, EuclideanVariantsAgree) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> rows(30, std::vector<double>(5));
  for (auto& r : rows)
    for (double& x : r) x = normal(rng);
  const auto m = euclidean_model(rows);
  AnalogyDataset ds{{{"r", {}}, {"s", {}}}};
  std::uniform_int_distribution<int> w(0, 29);
  for (int i = 0; i < 60; ++i) {
    ds.categories[i % 2].items.push_back({"w" + std::to_string(w(rng)), "w" + std::to_string(w(rng)),
                                          "w" + std::to_string(w(rng)),
                                          "w" + std::to_string(w(rng))});
  }
  const auto e = eval_analogy(m, ds, AnalogyVariant::euclidean);
  const auto z = eval_analogy(m, ds, AnalogyVariant::z);
  const auto zp = eval_analogy(m, ds, AnalogyVariant::zprime);
  EXPECT_EQ(e.correct, z.correct);
  EXPECT_EQ(e.correct, zp.correct);
  EXPECT_EQ(e.scored, 60u);
  EXPECT_EQ(e.categories.size(), 2u);
  EXPECT_EQ(e.categories[0].total + e.categories[1].total, 60u);
}

TEST(AnalogyVariant, Parsing) {
  EXPECT_EQ(parse_analogy_variant("z"), AnalogyVariant::z);
  EXPECT_EQ(parse_analogy_variant("zprime"), AnalogyVariant::zprime);
  EXPECT_EQ(parse_analogy_variant("euclidean"), AnalogyVariant::euclidean);
  EXPECT_FALSE(parse_analogy_variant("Z'").has_value());
  EXPECT_EQ(to_string(AnalogyVariant::zprime), "zprime");
}

}  // namespace
}  // namespace hsgns
