#include "hsgns/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "hsgns/corpus.hpp"
#include "hsgns/errors.hpp"

namespace hsgns {

namespace gi = geometry::inplace;

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void malformed(const std::filesystem::path& path, std::size_t line,
                            const std::string& what) {
  throw DataError(path.string() + ":" + std::to_string(line) + ": " + what);
}

geometry::HyperboloidPoint point_of(std::span<const double> row) {
  return geometry::HyperboloidPoint(
      geometry::MinkowskiVector(std::vector<double>(row.begin(), row.end()),
                                geometry::detail::unchecked),
      geometry::detail::unchecked);
}

double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> unit(std::span<const double> v) {
  const double n = euclidean_norm(v);
  std::vector<double> out(v.begin(), v.end());
  if (n > 0.0) {
    for (double& x : out) x /= n;
  }
  return out;
}

std::optional<WordId> lookup(const EmbeddingModel& model, std::string_view word) {
  if (auto id = model.find(word)) return id;
  return model.find(lowercase(word));
}

// Brute-force scanner over all model rows. Keys are "smaller is closer":
// -<x, q>_M in hyperbolic mode (monotone in distance), -cos in Euclidean mode.
class NeighborIndex {
 public:
  explicit NeighborIndex(const EmbeddingModel& model) : model_(model) {
    if (model.geometry() == Geometry::euclidean) {
      norms_.resize(model.size());
      for (std::size_t i = 0; i < model.size(); ++i) norms_[i] = euclidean_norm(model.vector(i));
    }
  }

  std::vector<Neighbor> query(std::span<const double> point, std::size_t k,
                              std::span<const WordId> exclude) const {
    if (point.size() != model_.vectors().width()) {
      throw std::invalid_argument("query point has " + std::to_string(point.size()) +
                                  " coordinates, model rows have " +
                                  std::to_string(model_.vectors().width()));
    }
    std::vector<WordId> skip(exclude.begin(), exclude.end());
    std::sort(skip.begin(), skip.end());
    if (k == 0) return {};

    const bool hyperbolic = model_.geometry() == Geometry::hyperbolic;
    const double qnorm = hyperbolic ? 1.0 : euclidean_norm(point);
    using Entry = std::pair<double, WordId>;
    std::priority_queue<Entry> heap;  // worst candidate on top
    for (std::size_t i = 0; i < model_.size(); ++i) {
      const auto id = static_cast<WordId>(i);
      if (std::binary_search(skip.begin(), skip.end(), id)) continue;
      const auto row = model_.vector(i);
      double key;
      if (hyperbolic) {
        key = -gi::dot(point, row);
      } else {
        double dot = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) dot += point[j] * row[j];
        const double denom = qnorm * norms_[i];
        key = denom > 0.0 ? -dot / denom : 0.0;
      }
      if (std::isnan(key)) continue;
      const Entry e{key, id};
      if (heap.size() < k) {
        heap.push(e);
      } else if (e < heap.top()) {
        heap.pop();
        heap.push(e);
      }
    }
    std::vector<Entry> best;
    best.reserve(heap.size());
    while (!heap.empty()) {
      best.push_back(heap.top());
      heap.pop();
    }
    std::reverse(best.begin(), best.end());

    std::vector<Neighbor> out;
    out.reserve(best.size());
    for (const auto& [key, id] : best) {
      if (hyperbolic) {
        const auto row = model_.vector(static_cast<std::size_t>(id));
        out.push_back({id, geometry::distance(point_of(point), point_of(row))});
      } else {
        out.push_back({id, -key});
      }
    }
    return out;
  }

 private:
  const EmbeddingModel& model_;
  std::vector<double> norms_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Datasets

SimilarityDataset load_similarity_dataset(const std::filesystem::path& path) {
  SimilarityDataset ds;
  ds.name = path.stem().string();
  std::size_t line_no = 0;
  for_each_line(path, [&](std::string_view raw) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    const auto fields = split(line, '\t');
    if (fields.size() != 3) {
      malformed(path, line_no,
                "expected word1<TAB>word2<TAB>score, got " + std::to_string(fields.size()) +
                    " field(s)");
    }
    const auto a = trim(fields[0]);
    const auto b = trim(fields[1]);
    const auto s = trim(fields[2]);
    if (a.empty() || b.empty()) malformed(path, line_no, "empty word");
    double score = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), score);
    if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(score)) {
      malformed(path, line_no, "bad score '" + std::string(s) + "'");
    }
    ds.pairs.push_back({std::string(a), std::string(b), score});
  });
  if (ds.pairs.empty()) throw DataError(path.string() + ": no word pairs found");
  return ds;
}

std::size_t AnalogyDataset::size() const noexcept {
  std::size_t n = 0;
  for (const auto& c : categories) n += c.items.size();
  return n;
}

AnalogyDataset load_analogy_dataset(const std::filesystem::path& path) {
  AnalogyDataset ds;
  std::size_t line_no = 0;
  for_each_line(path, [&](std::string_view raw) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) return;
    if (line.front() == ':') {
      ds.categories.push_back({std::string(trim(line.substr(1))), {}});
      return;
    }
    const auto words = split_whitespace(line);
    if (words.size() != 4) {
      malformed(path, line_no, "expected four words, got " + std::to_string(words.size()));
    }
    if (ds.categories.empty()) malformed(path, line_no, "analogy before any ': category' header");
    ds.categories.back().items.push_back({std::string(words[0]), std::string(words[1]),
                                          std::string(words[2]), std::string(words[3])});
  });
  if (ds.size() == 0) throw DataError(path.string() + ": no analogy items found");
  return ds;
}

// ---------------------------------------------------------------------------
// Similarity

double model_similarity(const EmbeddingModel& model, WordId a, WordId b) {
  const auto n = static_cast<WordId>(model.size());
  if (a < 0 || b < 0 || a >= n || b >= n) throw std::out_of_range("word index out of range");
  const auto x = model.vector(static_cast<std::size_t>(a));
  const auto y = model.vector(static_cast<std::size_t>(b));
  if (model.geometry() == Geometry::hyperbolic) return gi::dot(x, y);
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
  const double denom = euclidean_norm(x) * euclidean_norm(y);
  return denom > 0.0 ? dot / denom : 0.0;
}

std::optional<double> model_similarity(const EmbeddingModel& model, std::string_view a,
                                       std::string_view b) {
  const auto ia = lookup(model, a);
  const auto ib = lookup(model, b);
  if (!ia || !ib) return std::nullopt;
  return model_similarity(model, *ia, *ib);
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return xs[i] < xs[j]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && xs[order[j]] == xs[order[i]]) ++j;
    // Positions i..j-1 (0-based) share the mean 1-based rank.
    const double r = 0.5 * static_cast<double>(i + j + 1);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = r;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("spearman: lists differ in length");
  if (xs.size() < 2) throw std::invalid_argument("spearman: need at least two observations");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(rx.size());
  const double mean = 0.5 * (n + 1.0);  // the mean of any average-rank vector
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw std::domain_error("spearman: constant ranks");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

SimilarityReport eval_similarity(const EmbeddingModel& model,
                                 std::span<const SimilarityDataset> datasets) {
  SimilarityReport report;
  double weighted = 0.0;
  double weight = 0.0;
  for (const auto& ds : datasets) {
    SimilarityResult r;
    r.name = ds.name;
    r.pairs_total = ds.pairs.size();
    std::vector<double> human, predicted;
    for (const auto& p : ds.pairs) {
      if (const auto s = model_similarity(model, p.first, p.second)) {
        human.push_back(p.score);
        predicted.push_back(*s);
      }
    }
    r.pairs_scored = human.size();
    r.coverage = r.pairs_total > 0
                     ? static_cast<double>(r.pairs_scored) / static_cast<double>(r.pairs_total)
                     : 0.0;
    if (r.pairs_scored >= 2) {
      try {
        r.spearman = spearman(human, predicted);
      } catch (const std::domain_error&) {
        r.spearman.reset();
      }
    }
    if (r.spearman) {
      weighted += static_cast<double>(r.pairs_scored) * *r.spearman;
      weight += static_cast<double>(r.pairs_scored);
    }
    report.datasets.push_back(std::move(r));
  }
  if (weight > 0.0) report.weighted_average = weighted / weight;
  return report;
}

// ---------------------------------------------------------------------------
// Analogy

geometry::HyperboloidPoint analogy_target_Z(const geometry::HyperboloidPoint& a,
                                            const geometry::HyperboloidPoint& b,
                                            const geometry::HyperboloidPoint& c) {
  const auto w = geometry::log_map(a, b);
  return geometry::exp_map(c, geometry::parallel_transport(a, c, w));
}

geometry::HyperboloidPoint analogy_target_Zprime(const geometry::HyperboloidPoint& a,
                                                 const geometry::HyperboloidPoint& b,
                                                 const geometry::HyperboloidPoint& c) {
  const auto v = geometry::log_map(a, c);
  return geometry::exp_map(b, geometry::parallel_transport(a, b, v));
}

std::vector<double> analogy_target_euclidean(std::span<const double> a, std::span<const double> b,
                                             std::span<const double> c) {
  if (a.size() != b.size() || a.size() != c.size()) {
    throw std::invalid_argument("analogy_target_euclidean: dimension mismatch");
  }
  const auto ua = unit(a);
  const auto ub = unit(b);
  const auto uc = unit(c);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (ub[i] + uc[i]) - ua[i];
  return out;
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingModel& model, std::span<const double> point,
                                        std::size_t k, std::span<const WordId> exclude) {
  return NeighborIndex(model).query(point, k, exclude);
}

std::string_view to_string(AnalogyVariant v) noexcept {
  switch (v) {
    case AnalogyVariant::z:
      return "z";
    case AnalogyVariant::zprime:
      return "zprime";
    case AnalogyVariant::euclidean:
      return "euclidean";
  }
  return "?";
}

std::optional<AnalogyVariant> parse_analogy_variant(std::string_view s) noexcept {
  if (s == "z") return AnalogyVariant::z;
  if (s == "zprime") return AnalogyVariant::zprime;
  if (s == "euclidean") return AnalogyVariant::euclidean;
  return std::nullopt;
}

AnalogyReport eval_analogy(const EmbeddingModel& model, const AnalogyDataset& dataset,
                           AnalogyVariant variant) {
  const bool hyperbolic = model.geometry() == Geometry::hyperbolic;
  if (hyperbolic && variant == AnalogyVariant::euclidean) {
    throw std::invalid_argument("the euclidean analogy variant needs a Euclidean model");
  }
  const NeighborIndex index(model);
  AnalogyReport report;
  report.variant = variant;
  for (const auto& cat : dataset.categories) {
    AnalogyCategoryResult r;
    r.name = cat.name;
    r.total = cat.items.size();
    for (const auto& item : cat.items) {
      const auto a = lookup(model, item.a);
      const auto b = lookup(model, item.b);
      const auto c = lookup(model, item.c);
      const auto d = lookup(model, item.d);
      if (!a || !b || !c || !d) continue;
      ++r.scored;
      const auto row = [&](WordId id) { return model.vector(static_cast<std::size_t>(id)); };
      std::vector<double> target;
      if (hyperbolic) {
        const auto pa = point_of(row(*a));
        const auto pb = point_of(row(*b));
        const auto pc = point_of(row(*c));
        const auto z = variant == AnalogyVariant::z ? analogy_target_Z(pa, pb, pc)
                                                    : analogy_target_Zprime(pa, pb, pc);
        target.assign(z.coords().begin(), z.coords().end());
      } else if (variant == AnalogyVariant::zprime) {
        target = analogy_target_euclidean(row(*a), row(*c), row(*b));
      } else {
        target = analogy_target_euclidean(row(*a), row(*b), row(*c));
      }
      const WordId exclude[] = {*a, *b, *c};
      const auto best = index.query(target, 1, exclude);
      if (!best.empty() && best.front().id == *d) ++r.correct;
    }
    if (r.scored > 0) r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.scored);
    report.total += r.total;
    report.scored += r.scored;
    report.correct += r.correct;
    report.categories.push_back(std::move(r));
  }
  report.coverage = report.total > 0
                        ? static_cast<double>(report.scored) / static_cast<double>(report.total)
                        : 0.0;
  if (report.scored > 0) {
    report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.scored);
  }
  return report;
}

}  // namespace hsgns
