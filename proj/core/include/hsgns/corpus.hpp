#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hsgns {

using WordId = std::int32_t;

namespace detail {
__extension__ typedef unsigned __int128 uint128;
}

// ---------------------------------------------------------------------------
// Tokenization

/// Splits a UTF-8 line into lowercase tokens: maximal runs of alphanumeric
/// characters (Unicode classes), at least two characters long, not starting
/// with a digit. Everything else separates tokens. Invalid UTF-8 bytes act as
/// separators and are counted in `invalid_bytes` when it is non-null.
std::vector<std::string> tokenize(std::string_view line, std::uint64_t* invalid_bytes = nullptr);

/// Calls `sink` for every token of `line`; same rules as tokenize().
void for_each_token(std::string_view line, const std::function<void(std::string_view)>& sink,
                    std::uint64_t* invalid_bytes = nullptr);

/// Unicode lowercase of a UTF-8 word (invalid bytes are dropped).
std::string lowercase(std::string_view word);

// ---------------------------------------------------------------------------
// Sampling helpers

/// 1 - min(1, sqrt(t/f) + t/f), the chance of dropping one occurrence of a
/// word with relative frequency f under subsampling threshold t.
double discard_probability(double word_freq, double t);

/// Draws word indices with probability proportional to count^power using
/// Walker's alias method (O(1) per draw).
class NegativeSampler {
 public:
  NegativeSampler() = default;
  NegativeSampler(std::span<const std::int64_t> counts, double power);

  std::size_t size() const noexcept { return threshold_.size(); }
  /// Exact sampling probability of word i.
  double probability(WordId i) const { return probability_.at(static_cast<std::size_t>(i)); }

  template <class URBG>
  WordId operator()(URBG& rng) const {
    const std::uint64_t n = threshold_.size();
    const std::uint64_t r = rng();
    const auto column = static_cast<std::size_t>((static_cast<detail::uint128>(r) * n) >> 64);
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return u < threshold_[column] ? static_cast<WordId>(column) : alias_[column];
  }

 private:
  std::vector<double> threshold_;
  std::vector<WordId> alias_;
  std::vector<double> probability_;
};

// ---------------------------------------------------------------------------
// Vocabulary

struct VocabularyOptions {
  std::int64_t min_count = 15;
  double subsample = 1e-5;
  double negative_power = 0.75;
};

class Vocabulary {
 public:
  struct Entry {
    std::string word;
    std::int64_t count = 0;
  };

  /// `entries` must be in first-occurrence order. Words below min_count are
  /// dropped; the rest are ordered by descending count, ties keeping their
  /// relative order. Throws DataError if nothing survives.
  static Vocabulary from_counts(std::vector<Entry> entries, const VocabularyOptions& options);

  /// Reads "word<TAB>count" lines, keeping the file's order. min_count still applies.
  static Vocabulary load(const std::filesystem::path& path, const VocabularyOptions& options);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const noexcept { return entries_.size(); }
  const std::string& word(WordId id) const { return entries_.at(static_cast<std::size_t>(id)).word; }
  std::int64_t count(WordId id) const { return entries_.at(static_cast<std::size_t>(id)).count; }
  std::span<const Entry> entries() const noexcept { return entries_; }
  std::optional<WordId> find(std::string_view word) const;
  std::int64_t total_tokens() const noexcept { return total_tokens_; }
  double discard_prob(WordId id) const { return discard_.at(static_cast<std::size_t>(id)); }
  const NegativeSampler& negatives() const noexcept { return negatives_; }
  const VocabularyOptions& options() const noexcept { return options_; }

 private:
  Vocabulary() = default;
  void index();

  std::vector<Entry> entries_;
  std::unordered_map<std::string, WordId> lookup_;
  std::int64_t total_tokens_ = 0;
  std::vector<double> discard_;
  NegativeSampler negatives_;
  VocabularyOptions options_;
};

/// Counts tokens in order of first appearance.
class VocabularyBuilder {
 public:
  /// Returns the provisional id of the token (dense, first-occurrence order).
  WordId add(std::string_view token);
  std::size_t distinct() const noexcept { return entries_.size(); }
  Vocabulary build(const VocabularyOptions& options) const;
  /// Maps provisional ids onto the ids of `vocab`, -1 for dropped words.
  std::vector<WordId> remap(const Vocabulary& vocab) const;

 private:
  std::vector<Vocabulary::Entry> entries_;
  std::unordered_map<std::string, WordId> lookup_;
};

Vocabulary build_vocab(std::span<const std::string> tokens, std::int64_t min_count);

/// Sampling structure over the vocabulary, weights count^power.
NegativeSampler negative_table(const Vocabulary& vocab, double power);

// ---------------------------------------------------------------------------
// Corpus and training events

/// A tokenized corpus held in memory as word ids, one span per input line.
/// Out-of-vocabulary tokens are removed at load time.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<WordId> tokens, std::vector<std::size_t> line_offsets);

  std::size_t lines() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<const WordId> line(std::size_t i) const {
    return {tokens_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t tokens() const noexcept { return tokens_.size(); }

  /// Splits the lines into `n` contiguous ranges of roughly equal token counts.
  std::vector<std::pair<std::size_t, std::size_t>> shards(std::size_t n) const;

 private:
  std::vector<WordId> tokens_;
  std::vector<std::size_t> offsets_{0};
};

struct LoadedCorpus {
  Vocabulary vocab;
  Corpus corpus;
  std::uint64_t lines_read = 0;
  std::uint64_t invalid_bytes = 0;
};

/// Reads UTF-8 text, one document per line, gzip-compressed or plain; builds
/// the vocabulary and the id-encoded corpus in one pass.
LoadedCorpus load_corpus(const std::filesystem::path& path, const VocabularyOptions& options);

/// Calls `fn` for each line of a plain or gzip-compressed text file.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view)>& fn);

struct TrainingEvent {
  WordId centre = 0;
  WordId positive = 0;
  std::vector<WordId> negatives;

  friend bool operator==(const TrainingEvent&, const TrainingEvent&) = default;
};

struct EventOptions {
  int window = 10;
  int negatives = 10;
  bool dynamic_window = true;
};

/// Appends to `out` the ids of `line` that survive subsampling.
template <class URBG>
void subsample_line(std::span<const WordId> line, const Vocabulary& vocab, URBG& rng,
                    std::vector<WordId>& out) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (WordId w : line) {
    const double p = vocab.discard_prob(w);
    if (p <= 0.0 || unit(rng) >= p) out.push_back(w);
  }
}

/// Visits every (centre, context) pair of the line. For each centre position
/// an effective window b is drawn from 1..window (or fixed at window), every
/// other position within b yields one event, and `negatives` noise words are
/// drawn for it, resampling draws equal to the positive word when the
/// vocabulary has more than one word.
///
/// `on_position(i)` runs before the events of centre position i.
template <class URBG, class Fn, class PositionFn>
void for_each_event(std::span<const WordId> tokens, const EventOptions& options,
                    const NegativeSampler& sampler, URBG& rng, std::vector<WordId>& negatives,
                    Fn&& fn, PositionFn&& on_position) {
  const auto n = static_cast<std::ptrdiff_t>(tokens.size());
  std::uniform_int_distribution<int> window_draw(1, std::max(1, options.window));
  negatives.resize(static_cast<std::size_t>(options.negatives));
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    on_position(static_cast<std::size_t>(i));
    const int b = options.dynamic_window ? window_draw(rng) : options.window;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - b);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + b);
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      if (j == i) continue;
      const WordId positive = tokens[static_cast<std::size_t>(j)];
      for (auto& neg : negatives) {
        do {
          neg = sampler(rng);
        } while (neg == positive && sampler.size() > 1);
      }
      fn(tokens[static_cast<std::size_t>(i)], positive, std::span<const WordId>(negatives));
    }
  }
}

template <class URBG, class Fn>
void for_each_event(std::span<const WordId> tokens, const EventOptions& options,
                    const NegativeSampler& sampler, URBG& rng, std::vector<WordId>& negatives,
                    Fn&& fn) {
  for_each_event(tokens, options, sampler, rng, negatives, std::forward<Fn>(fn),
                 [](std::size_t) {});
}

/// Materialized form of for_each_event.
template <class URBG>
std::vector<TrainingEvent> generate_events(std::span<const WordId> tokens,
                                           const EventOptions& options,
                                           const NegativeSampler& sampler, URBG& rng) {
  std::vector<TrainingEvent> events;
  std::vector<WordId> scratch;
  for_each_event(tokens, options, sampler, rng, scratch,
                 [&](WordId c, WordId p, std::span<const WordId> negs) {
                   events.push_back({c, p, {negs.begin(), negs.end()}});
                 });
  return events;
}

}  // namespace hsgns
