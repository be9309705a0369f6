#include "hsgns/embedding.hpp"

#include <cmath>
#include <stdexcept>

#include "hsgns/errors.hpp"
#include "hsgns/geometry.hpp"

namespace hsgns {

std::string_view to_string(Geometry g) noexcept {
  return g == Geometry::hyperbolic ? "hyperbolic" : "euclidean";
}

std::optional<Geometry> parse_geometry(std::string_view s) noexcept {
  if (s == "hyperbolic") return Geometry::hyperbolic;
  if (s == "euclidean") return Geometry::euclidean;
  return std::nullopt;
}

EmbeddingMatrix::EmbeddingMatrix(Geometry geometry, Layer layer, std::size_t rows,
                                 std::size_t width)
    : geometry_(geometry), layer_(layer), rows_(rows), width_(width), data_(rows * width, 0.0) {
  const std::size_t min_width = geometry == Geometry::hyperbolic ? 2 : 1;
  if (width < min_width) {
    throw std::invalid_argument("embedding width " + std::to_string(width) + " is too small for " +
                                std::string(to_string(geometry)) + " mode");
  }
}

std::size_t count_constraint_violations(const EmbeddingMatrix& m, double tolerance) {
  if (m.geometry() != Geometry::hyperbolic) return 0;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    const double q = geometry::inplace::dot(r, r);
    if (!(std::abs(q + 1.0) <= tolerance) || !(r.back() > 0.0)) ++bad;
  }
  return bad;
}

EmbeddingModel::EmbeddingModel(std::vector<std::string> words, EmbeddingMatrix vectors,
                               double theta, bool tied, std::string config)
    : words_(std::move(words)),
      vectors_(std::move(vectors)),
      theta_(theta),
      tied_(tied),
      config_(std::move(config)) {
  if (words_.size() != vectors_.rows()) {
    throw DataError("model has " + std::to_string(words_.size()) + " words but " +
                    std::to_string(vectors_.rows()) + " vectors");
  }
  lookup_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!lookup_.emplace(words_[i], static_cast<WordId>(i)).second) {
      throw DataError("duplicate word in model: '" + words_[i] + "'");
    }
  }
}

std::optional<WordId> EmbeddingModel::find(std::string_view word) const {
  const auto it = lookup_.find(std::string(word));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

}  // namespace hsgns
