#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "hsgns/model_io.hpp"
#include "hsgns_cli/cli.hpp"
#include "test_support.hpp"

namespace hsgns::cli {
namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hsgns");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

bool contains(const std::string& s, const std::string& needle) {
  return s.find(needle) != std::string::npos;
}

// A few hundred lines over a dozen words, enough for every word to clear
// the default min-count.
void write_corpus(const std::filesystem::path& p) {
  const std::vector<std::string> lines = {
      "the king rules the land with the queen",
      "the queen rules the land with the king",
      "a man walks and a woman walks",
      "the cat sat on the mat near the dog",
  };
  std::ofstream out(p);
  for (int i = 0; i < 100; ++i) {
    for (const auto& l : lines) out << l << "\n";
  }
}

class CliTest : public ::testing::Test {
 protected:
  test::TempDir dir;
  std::string corpus() {
    const auto p = dir / "corpus.txt";
    if (!std::filesystem::exists(p)) write_corpus(p);
    return p.string();
  }
  Result train(std::vector<std::string> extra, const std::string& output) {
    std::vector<std::string> args = {"train", "--input", corpus(), "--output", output,
                                     "--dim", "5", "--epochs", "1", "--threads", "1"};
    args.insert(args.end(), extra.begin(), extra.end());
    return invoke(args);
  }
};

TEST_F(CliTest, UsageErrorsExitWithTwo) {
  EXPECT_EQ(invoke({}).code, kUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kUsage);
  EXPECT_EQ(invoke({"train", "--input", corpus()}).code, kUsage);
  EXPECT_EQ(invoke({"nn", "--input", "m.bin"}).code, kUsage);
  EXPECT_EQ(train({"--mode", "spherical"}, (dir / "m").string()).code, kUsage);
  EXPECT_EQ(train({"--format", "csv"}, (dir / "m").string()).code, kUsage);
  EXPECT_EQ(train({"--dim", "0"}, (dir / "m").string()).code, kUsage);
  EXPECT_EQ(train({"--tied", "--untied"}, (dir / "m").string()).code, kUsage);
  EXPECT_EQ(invoke({"probe-objective", "--points", "0"}).code, kUsage);
}

TEST_F(CliTest, HelpExitsWithZero) {
  const auto r = invoke({"--help"});
  EXPECT_EQ(r.code, kOk);
  EXPECT_TRUE(contains(r.out, "train"));
}

TEST_F(CliTest, DataErrorsExitWithThree) {
  const auto trained = train({}, (dir / "m").string());
  EXPECT_EQ(trained.code, kOk) << trained.err;
  const auto r = invoke({"train", "--input", (dir / "absent.txt").string(), "--output",
                         (dir / "x").string()});
  EXPECT_EQ(r.code, kData);
  EXPECT_TRUE(contains(r.err, "absent.txt")) << r.err;
  EXPECT_EQ(invoke({"nn", "--input", (dir / "absent.bin").string(), "--word", "a"}).code, kData);
  write_all(dir / "bad.txt", "minkowski-sgns hyperbolic 1 2 3\nw 0.5 0.5\n");
  EXPECT_EQ(invoke({"nn", "--input", (dir / "bad.txt").string(), "--word", "w"}).code, kData);
}

TEST_F(CliTest, TrainEchoesResolvedDefaults) {
  const auto model = (dir / "m.bin").string();
  const auto r = train({}, model);
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_TRUE(contains(r.err, "resolved: train --input")) << r.err;
  for (const char* flag : {"--format binary", "--mode hyperbolic", "--dim 5", "--window 10",
                           "--min-count 15",
                           "--negatives 10", "--theta 3", "--threads 1", "--tied"}) {
    EXPECT_TRUE(contains(r.err, flag)) << flag << "\n" << r.err;
  }
  for (const char* line : {"tokens/sec:", "final mean loss:", "lock skip rate:",
                           "events applied:", "constraint violations: 0", "model: "}) {
    EXPECT_TRUE(contains(r.out, line)) << line << "\n" << r.out;
  }
  EXPECT_TRUE(std::filesystem::exists(model + ".vocab"));
  EXPECT_TRUE(std::filesystem::exists(model + ".json"));
  const auto m = load_model(model);
  EXPECT_EQ(m.geometry(), Geometry::hyperbolic);
  EXPECT_EQ(m.vectors().dim(), 5u);
  EXPECT_TRUE(m.tied());
}

TEST_F(CliTest, EuclideanIgnoresThetaWithWarning) {
  const auto r = train({"--mode", "euclidean", "--theta", "7"}, (dir / "e.bin").string());
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_TRUE(contains(r.err, "warning: --theta is ignored in euclidean mode")) << r.err;
  EXPECT_TRUE(contains(r.err, "--untied")) << r.err;
  const auto m = load_model(dir / "e.bin");
  EXPECT_EQ(m.geometry(), Geometry::euclidean);
  EXPECT_FALSE(m.tied());

  const auto quiet = train({"--mode", "euclidean"}, (dir / "q.bin").string());
  EXPECT_FALSE(contains(quiet.err, "warning")) << quiet.err;
}

TEST_F(CliTest, SingleThreadTrainingIsByteIdentical) {
  // The model embeds its own command line, so both runs write to one path.
  for (const char* format : {"binary", "text"}) {
    const auto path = (dir / (std::string("m.") + format)).string();
    ASSERT_EQ(train({"--seed", "7", "--format", format}, path).code, kOk);
    const auto first = read_all(path);
    ASSERT_EQ(train({"--seed", "7", "--format", format}, path).code, kOk);
    EXPECT_EQ(first, read_all(path)) << format;
  }
  const auto path = (dir / "m.binary").string();
  const auto seven = read_all(path);
  ASSERT_EQ(train({"--seed", "8"}, path).code, kOk);
  EXPECT_NE(seven, read_all(path));
}

// Hand-built model: words on one geodesic at known distances.
std::string write_line_model(const test::TempDir& dir) {
  std::ostringstream s;
  s.precision(17);
  const std::vector<std::pair<std::string, double>> words = {
      {"alpha", 0.0}, {"beta", 0.5}, {"gamma", 1.2}, {"delta", 2.0}, {"omega", 3.5}};
  s << "minkowski-sgns hyperbolic " << words.size() << " 3 3\n";
  for (const auto& [w, r] : words) s << w << ' ' << std::sinh(r) << " 0 " << std::cosh(r) << "\n";
  const auto p = dir / "line.txt";
  write_all(p, s.str());
  return p.string();
}

TEST_F(CliTest, EvalSimPrintsTableAndTsv) {
  const auto model = write_line_model(dir);
  // Distances from alpha grow with the index, so higher human scores on
  // closer pairs give a perfect ranking.
  write_all(dir / "sim.tsv",
            "alpha\tbeta\t9\nalpha\tgamma\t7\nALPHA\tdelta\t5\nalpha\tomega\t1\nalpha\tmissing\t3\n");
  write_all(dir / "other.tsv", "beta\tgamma\t2\nbeta\tomega\t1\n");
  const auto tsv = (dir / "out.tsv").string();
  const auto r = invoke({"eval-sim", "--input", model, "--dataset", (dir / "sim.tsv").string(),
                         "--dataset", (dir / "other.tsv").string(), "--tsv", tsv});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_TRUE(contains(r.out, "spearman")) << r.out;
  EXPECT_TRUE(contains(r.out, "weighted-average")) << r.out;
  EXPECT_TRUE(contains(r.out, "0.8000")) << r.out;  // coverage 4 of 5

  std::istringstream t(read_all(tsv));
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(t, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "dataset\tpairs_scored\tcoverage\tspearman");
  EXPECT_EQ(rows[1].substr(rows[1].find('\t')), "\t4\t0.8\t1");
  EXPECT_EQ(rows[2].substr(rows[2].find('\t')), "\t2\t1\t1");
  EXPECT_EQ(rows[3], "weighted-average\t6\t0.8571428571428571\t1");
}

TEST_F(CliTest, EvalAnalogy) {
  const auto model = write_line_model(dir);
  write_all(dir / "q.txt", ": line\nalpha beta gamma delta\nalpha beta nope delta\n");
  const auto bad = invoke({"eval-analogy", "--input", model, "--dataset",
                           (dir / "q.txt").string(), "--variant", "euclidean"});
  EXPECT_EQ(bad.code, kUsage);
  EXPECT_EQ(invoke({"eval-analogy", "--input", model, "--dataset", (dir / "q.txt").string(),
                    "--variant", "sideways"})
                .code,
            kUsage);

  const auto r = invoke({"eval-analogy", "--input", model, "--dataset", (dir / "q.txt").string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_TRUE(contains(r.err, "--variant z")) << r.err;
  EXPECT_TRUE(contains(r.out, "overall")) << r.out;
  EXPECT_TRUE(contains(r.out, "coverage: 0.5000")) << r.out;
}

TEST_F(CliTest, NearestNeighbours) {
  const auto model = write_line_model(dir);
  const auto r = invoke({"nn", "--input", model, "--word", "gamma", "--k", "2"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(r.out, "rank\tword\tdistance\n1\tbeta\t0.700000\n2\tdelta\t0.800000\n");

  const auto self = invoke({"nn", "--input", model, "--word", "Gamma", "--k", "1",
                            "--include-self"});
  ASSERT_EQ(self.code, kOk) << self.err;
  EXPECT_EQ(self.out, "rank\tword\tdistance\n1\tgamma\t0.000000\n");

  const auto none = invoke({"nn", "--input", model, "--word", "gamma", "--k", "0"});
  EXPECT_EQ(none.out, "rank\tword\tdistance\n");

  const auto all = invoke({"nn", "--input", model, "--word", "alpha", "--k", "50"});
  EXPECT_EQ(std::count(all.out.begin(), all.out.end(), '\n'), 5);

  const auto oov = invoke({"nn", "--input", model, "--word", "gamm"});
  EXPECT_EQ(oov.code, kData);
  EXPECT_TRUE(contains(oov.err, "gamm")) << oov.err;
  EXPECT_TRUE(contains(oov.err, "closest entries: gamma")) << oov.err;
}

TEST_F(CliTest, NearestNeighboursEuclideanUsesCosine) {
  write_all(dir / "e.txt", "minkowski-sgns euclidean 3 2 0\na 1 0\nb 1 1\nc -1 0\n");
  const auto r = invoke({"nn", "--input", (dir / "e.txt").string(), "--word", "a"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(r.out, "rank\tword\tcosine\n1\tb\t0.707107\n2\tc\t-1.000000\n");
}

TEST(ProbeObjective, Values) {
  const auto rows = probe_objective(3.0, 5.0, 51);
  ASSERT_EQ(rows.size(), 51u);
  EXPECT_EQ(rows.front().first, 0.0);
  EXPECT_EQ(rows.back().first, 5.0);
  // sigma(3 - 1) at d = 0.
  EXPECT_NEAR(rows.front().second, 0.8807970779778823, 1e-15);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].second, rows[i - 1].second);
  // One half where cosh d = theta.
  const double mid = std::acosh(3.0);
  EXPECT_NEAR(probe_objective(3.0, mid, 2).back().second, 0.5, 1e-15);
  EXPECT_EQ(probe_objective(3.0, 5.0, 1).size(), 1u);
}

TEST(ProbeObjective, CommandOutput) {
  const auto r = invoke({"probe-objective", "--theta", "3", "--dmax", "1", "--points", "3"});
  ASSERT_EQ(r.code, kOk) << r.err;
  std::istringstream s(r.out);
  std::string header;
  std::getline(s, header);
  EXPECT_EQ(header, "distance\tprobability");
  double d = 0.0, p = 0.0;
  std::vector<double> ds;
  while (s >> d >> p) ds.push_back(d);
  EXPECT_EQ(ds, (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(EditDistance, Examples) {
  EXPECT_EQ(edit_distance("", ""), 0u);
  EXPECT_EQ(edit_distance("abc", ""), 3u);
  EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
  EXPECT_EQ(edit_distance("flaw", "lawn"), 2u);
  EXPECT_EQ(edit_distance("same", "same"), 0u);
}

TEST(EditDistance, IsSymmetric) {
  const std::vector<std::string> words = {"king", "kings", "queen", "quean", "", "gnik"};
  for (const auto& a : words)
    for (const auto& b : words) EXPECT_EQ(edit_distance(a, b), edit_distance(b, a));
}

}  // namespace
}  // namespace hsgns::cli
