#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hsgns/embedding.hpp"
#include "hsgns/geometry.hpp"

namespace hsgns {

// ---------------------------------------------------------------------------
// Datasets

struct SimilarityPair {
  std::string first;
  std::string second;
  double score = 0.0;
};

struct SimilarityDataset {
  std::string name;
  std::vector<SimilarityPair> pairs;
};

/// Reads "word1<TAB>word2<TAB>score" lines; '#' lines and blank lines are
/// skipped. The dataset is named after the file stem. Throws DataError with
/// the line number on malformed input or when no pair is found.
SimilarityDataset load_similarity_dataset(const std::filesystem::path& path);

struct AnalogyItem {
  std::string a, b, c, d;
};

struct AnalogyCategory {
  std::string name;
  std::vector<AnalogyItem> items;
};

struct AnalogyDataset {
  std::vector<AnalogyCategory> categories;
  std::size_t size() const noexcept;
};

/// Google analogy format: ": category" headers followed by lines of four
/// space-separated words. Throws DataError with the line number otherwise.
AnalogyDataset load_analogy_dataset(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Similarity

/// Minkowski product of the two rows in hyperbolic mode (higher is closer,
/// -1 at most), cosine similarity in Euclidean mode.
double model_similarity(const EmbeddingModel& model, WordId a, WordId b);

/// Looks both words up after lowercasing; nullopt if either is missing.
std::optional<double> model_similarity(const EmbeddingModel& model, std::string_view a,
                                       std::string_view b);

/// 1-based ranks, tied values sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

/// Pearson correlation of the average ranks. Throws std::invalid_argument for
/// mismatched or too short inputs and std::domain_error when either list has
/// zero rank variance.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct SimilarityResult {
  std::string name;
  std::size_t pairs_total = 0;
  std::size_t pairs_scored = 0;
  double coverage = 0.0;
  /// Undefined when fewer than two pairs are covered or ranks are constant.
  std::optional<double> spearman;
};

struct SimilarityReport {
  std::vector<SimilarityResult> datasets;
  /// Mean of the defined per-dataset values weighted by scored-pair counts.
  std::optional<double> weighted_average;
};

SimilarityReport eval_similarity(const EmbeddingModel& model,
                                 std::span<const SimilarityDataset> datasets);

// ---------------------------------------------------------------------------
// Analogy

/// Transports the relation Log_A(B) to C and follows it: Exp_C(PT_{A->C}(Log_A B)).
geometry::HyperboloidPoint analogy_target_Z(const geometry::HyperboloidPoint& a,
                                            const geometry::HyperboloidPoint& b,
                                            const geometry::HyperboloidPoint& c);

/// The other sense: Exp_B(PT_{A->B}(Log_A C)).
geometry::HyperboloidPoint analogy_target_Zprime(const geometry::HyperboloidPoint& a,
                                                 const geometry::HyperboloidPoint& b,
                                                 const geometry::HyperboloidPoint& c);

/// (B^ + C^) - A^ on unit-normalized inputs. The sum is formed first so that
/// swapping B and C gives the same bits.
std::vector<double> analogy_target_euclidean(std::span<const double> a, std::span<const double> b,
                                             std::span<const double> c);

struct Neighbor {
  WordId id = 0;
  /// Hyperbolic distance, or cosine similarity in Euclidean mode.
  double value = 0.0;
};

/// The k words closest to `point` (ascending distance, or descending cosine),
/// skipping `exclude`; ties go to the lower vocabulary index. Returns fewer
/// than k entries when the vocabulary runs out.
std::vector<Neighbor> nearest_neighbors(const EmbeddingModel& model, std::span<const double> point,
                                        std::size_t k, std::span<const WordId> exclude = {});

enum class AnalogyVariant { z, zprime, euclidean };

std::string_view to_string(AnalogyVariant v) noexcept;
/// Accepts "z", "zprime" and "euclidean".
std::optional<AnalogyVariant> parse_analogy_variant(std::string_view s) noexcept;

struct AnalogyCategoryResult {
  std::string name;
  std::size_t total = 0;
  std::size_t scored = 0;
  std::size_t correct = 0;
  std::optional<double> accuracy;
};

struct AnalogyReport {
  AnalogyVariant variant = AnalogyVariant::z;
  std::vector<AnalogyCategoryResult> categories;
  std::size_t total = 0;
  std::size_t scored = 0;
  std::size_t correct = 0;
  double coverage = 0.0;
  /// Micro-averaged over scored items; undefined when nothing was scored.
  std::optional<double> accuracy;
};

/// An item counts as correct when the nearest word to the target, excluding
/// A, B and C, is D. Items with an out-of-vocabulary word are skipped. The
/// euclidean variant needs a Euclidean model; on a Euclidean model z and
/// zprime reduce to the flat target (identical results). Throws
/// std::invalid_argument on a variant/mode mismatch.
AnalogyReport eval_analogy(const EmbeddingModel& model, const AnalogyDataset& dataset,
                           AnalogyVariant variant);

}  // namespace hsgns
