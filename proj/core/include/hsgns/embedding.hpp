#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hsgns/corpus.hpp"

namespace hsgns {

enum class Geometry { hyperbolic, euclidean };

std::string_view to_string(Geometry g) noexcept;
/// Parses "hyperbolic" or "euclidean"; nullopt otherwise.
std::optional<Geometry> parse_geometry(std::string_view s) noexcept;

enum class Layer { alpha, beta, tied };

/// Row-major |V| x width parameter block. In hyperbolic mode each row holds
/// the d+1 ambient coordinates of a point on H^d; in Euclidean mode a plain
/// d-vector.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(Geometry geometry, Layer layer, std::size_t rows, std::size_t width);

  Geometry geometry() const noexcept { return geometry_; }
  Layer layer() const noexcept { return layer_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t width() const noexcept { return width_; }
  /// Embedding dimension d (width minus one in hyperbolic mode).
  std::size_t dim() const noexcept {
    return geometry_ == Geometry::hyperbolic ? width_ - 1 : width_;
  }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * width_, width_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * width_, width_};
  }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  Geometry geometry_;
  Layer layer_;
  std::size_t rows_;
  std::size_t width_;
  std::vector<double> data_;
};

/// Counts rows of a hyperbolic matrix with |<x,x> + 1| > tolerance or x_n <= 0.
std::size_t count_constraint_violations(const EmbeddingMatrix& m, double tolerance);

/// A trained, frozen set of word vectors as used by evaluation and model files.
class EmbeddingModel {
 public:
  EmbeddingModel(std::vector<std::string> words, EmbeddingMatrix vectors, double theta,
                 bool tied, std::string config = {});

  Geometry geometry() const noexcept { return vectors_.geometry(); }
  double theta() const noexcept { return theta_; }
  bool tied() const noexcept { return tied_; }
  const std::string& config() const noexcept { return config_; }

  std::size_t size() const noexcept { return words_.size(); }
  const std::string& word(std::size_t i) const { return words_.at(i); }
  std::span<const std::string> words() const noexcept { return words_; }
  std::optional<WordId> find(std::string_view word) const;
  std::span<const double> vector(std::size_t i) const noexcept { return vectors_.row(i); }
  const EmbeddingMatrix& vectors() const noexcept { return vectors_; }

  friend bool operator==(const EmbeddingModel& a, const EmbeddingModel& b) {
    return a.words_ == b.words_ && a.vectors_ == b.vectors_ && a.theta_ == b.theta_ &&
           a.tied_ == b.tied_;
  }

 private:
  std::vector<std::string> words_;
  EmbeddingMatrix vectors_;
  double theta_;
  bool tied_;
  std::string config_;
  std::unordered_map<std::string, WordId> lookup_;
};

}  // namespace hsgns
