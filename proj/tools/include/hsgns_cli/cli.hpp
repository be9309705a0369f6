#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hsgns/embedding.hpp"

namespace hsgns::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kNumerical = 4,
};

/// Entry point shared by the executable and the tests. Regular output goes to
/// `out`; the resolved configuration, progress and diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Levenshtein distance over bytes.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// Up to `n` vocabulary words closest to `word` by edit distance, ties in
/// vocabulary order.
std::vector<std::string> suggest_words(const EmbeddingModel& model, std::string_view word,
                                       std::size_t n = 5);

/// (d, sigma(theta - cosh d)) on `points` evenly spaced distances in [0, dmax]:
/// the probability that a pair at hyperbolic distance d is judged positive.
std::vector<std::pair<double, double>> probe_objective(double theta, double dmax,
                                                       std::size_t points);

}  // namespace hsgns::cli
