#include "hsgns/corpus.hpp"

#include <zlib.h>

#include <algorithm>
#include <clocale>
#include <cmath>
#include <cwctype>
#include <fstream>
#include <memory>
#include <numeric>
#include <stdexcept>

#include <locale.h>
#include <wctype.h>

#include "hsgns/errors.hpp"

namespace hsgns {

namespace {

// Unicode character classes come from the C.UTF-8 locale when the C library
// provides it; otherwise only ASCII letters and digits count as alphanumeric.
class CharClasses {
 public:
  CharClasses() : loc_(newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(nullptr))) {}
  ~CharClasses() {
    if (loc_ != static_cast<locale_t>(nullptr)) freelocale(loc_);
  }
  CharClasses(const CharClasses&) = delete;
  CharClasses& operator=(const CharClasses&) = delete;

  bool alnum(char32_t c) const {
    if (c < 0x80) return is_ascii_alnum(c);
    return loc_ != static_cast<locale_t>(nullptr) && iswalnum_l(static_cast<wint_t>(c), loc_);
  }
  // Numeric characters: alphanumeric but not alphabetic.
  bool digit(char32_t c) const {
    if (c < 0x80) return c >= '0' && c <= '9';
    return loc_ != static_cast<locale_t>(nullptr) && iswalnum_l(static_cast<wint_t>(c), loc_) &&
           !iswalpha_l(static_cast<wint_t>(c), loc_);
  }
  char32_t lower(char32_t c) const {
    if (c < 0x80) return (c >= 'A' && c <= 'Z') ? c + 32 : c;
    if (loc_ == static_cast<locale_t>(nullptr)) return c;
    return static_cast<char32_t>(towlower_l(static_cast<wint_t>(c), loc_));
  }

 private:
  static bool is_ascii_alnum(char32_t c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  }
  locale_t loc_;
};

const CharClasses& classes() {
  static const CharClasses instance;
  return instance;
}

// Decodes one code point starting at s[i]. Returns the byte length, or 0 for
// an invalid sequence (overlong, surrogate, truncated or out of range).
std::size_t decode_utf8(std::string_view s, std::size_t i, char32_t& out) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    out = b0;
    return 1;
  }
  std::size_t len;
  char32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  out = cp;
  return len;
}

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

}  // namespace

void for_each_token(std::string_view line, const std::function<void(std::string_view)>& sink,
                    std::uint64_t* invalid_bytes) {
  const CharClasses& cc = classes();
  std::string run;
  std::size_t run_chars = 0;
  bool starts_with_digit = false;

  auto flush = [&] {
    if (run_chars >= 2 && !starts_with_digit) sink(run);
    run.clear();
    run_chars = 0;
  };

  std::size_t i = 0;
  while (i < line.size()) {
    char32_t c = 0;
    const std::size_t len = decode_utf8(line, i, c);
    if (len == 0) {
      if (invalid_bytes != nullptr) ++*invalid_bytes;
      flush();
      ++i;
      continue;
    }
    i += len;
    if (cc.alnum(c)) {
      if (run_chars == 0) starts_with_digit = cc.digit(c);
      append_utf8(run, cc.lower(c));
      ++run_chars;
    } else {
      flush();
    }
  }
  flush();
}

std::vector<std::string> tokenize(std::string_view line, std::uint64_t* invalid_bytes) {
  std::vector<std::string> tokens;
  for_each_token(line, [&](std::string_view t) { tokens.emplace_back(t); }, invalid_bytes);
  return tokens;
}

std::string lowercase(std::string_view word) {
  const CharClasses& cc = classes();
  std::string out;
  out.reserve(word.size());
  std::size_t i = 0;
  while (i < word.size()) {
    char32_t c = 0;
    const std::size_t len = decode_utf8(word, i, c);
    if (len == 0) {
      ++i;
      continue;
    }
    i += len;
    append_utf8(out, cc.lower(c));
  }
  return out;
}

// ---------------------------------------------------------------------------

double discard_probability(double word_freq, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("subsampling threshold must be positive");
  if (!(word_freq > 0.0) || word_freq > 1.0) {
    throw std::invalid_argument("word frequency must lie in (0, 1]");
  }
  const double r = t / word_freq;
  const double keep = std::min(1.0, std::sqrt(r) + r);
  return 1.0 - keep;
}

NegativeSampler::NegativeSampler(std::span<const std::int64_t> counts, double power) {
  if (counts.empty()) throw std::invalid_argument("negative sampler needs a non-empty vocabulary");
  if (!(power >= 0.0 && power <= 1.0)) {
    throw std::invalid_argument("negative sampling power must lie in [0, 1]");
  }
  const std::size_t n = counts.size();
  probability_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] <= 0) throw std::invalid_argument("negative sampler needs positive counts");
    probability_[i] = std::pow(static_cast<double>(counts[i]), power);
  }
  const double total = std::accumulate(probability_.begin(), probability_.end(), 0.0);
  for (double& p : probability_) p /= total;

  // Vose's construction of the alias table.
  threshold_.assign(n, 1.0);
  alias_.resize(n);
  std::iota(alias_.begin(), alias_.end(), 0);
  std::vector<double> scaled(n);
  std::vector<std::size_t> small;
  std::vector<std::size_t> large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = probability_[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    threshold_[s] = scaled[s];
    alias_[s] = static_cast<WordId>(l);
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (std::size_t i : large) threshold_[i] = 1.0;
  for (std::size_t i : small) threshold_[i] = 1.0;
}

// ---------------------------------------------------------------------------

Vocabulary Vocabulary::from_counts(std::vector<Entry> entries, const VocabularyOptions& options) {
  if (options.min_count < 1) throw std::invalid_argument("min_count must be at least 1");
  Vocabulary v;
  v.options_ = options;
  for (auto& e : entries) {
    if (e.count >= options.min_count) v.entries_.push_back(std::move(e));
  }
  if (v.entries_.empty()) {
    throw DataError("vocabulary is empty after discarding words with count < " +
                    std::to_string(options.min_count));
  }
  std::stable_sort(v.entries_.begin(), v.entries_.end(),
                   [](const Entry& a, const Entry& b) { return a.count > b.count; });
  v.index();
  return v;
}

void Vocabulary::index() {
  lookup_.clear();
  lookup_.reserve(entries_.size());
  total_tokens_ = 0;
  std::vector<std::int64_t> counts;
  counts.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!lookup_.emplace(entries_[i].word, static_cast<WordId>(i)).second) {
      throw DataError("duplicate vocabulary word '" + entries_[i].word + "'");
    }
    total_tokens_ += entries_[i].count;
    counts.push_back(entries_[i].count);
  }
  discard_.resize(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const double f = static_cast<double>(entries_[i].count) / static_cast<double>(total_tokens_);
    discard_[i] = discard_probability(f, options_.subsample);
  }
  negatives_ = NegativeSampler(counts, options_.negative_power);
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  const auto it = lookup_.find(std::string(word));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path, const VocabularyOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary file " + path.string());
  std::vector<Entry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected word<TAB>count");
    }
    Entry e;
    e.word = line.substr(0, tab);
    try {
      std::size_t used = 0;
      e.count = std::stoll(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1 || e.count < 1) throw std::invalid_argument("count");
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad count");
    }
    entries.push_back(std::move(e));
  }
  return from_counts(std::move(entries), options);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary file " + path.string());
  for (const auto& e : entries_) out << e.word << '\t' << e.count << '\n';
  if (!out) throw DataError("error writing vocabulary file " + path.string());
}

WordId VocabularyBuilder::add(std::string_view token) {
  auto it = lookup_.find(std::string(token));
  if (it == lookup_.end()) {
    const auto id = static_cast<WordId>(entries_.size());
    it = lookup_.emplace(std::string(token), id).first;
    entries_.push_back({std::string(token), 0});
  }
  ++entries_[static_cast<std::size_t>(it->second)].count;
  return it->second;
}

Vocabulary VocabularyBuilder::build(const VocabularyOptions& options) const {
  return Vocabulary::from_counts(entries_, options);
}

std::vector<WordId> VocabularyBuilder::remap(const Vocabulary& vocab) const {
  std::vector<WordId> out(entries_.size(), -1);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (auto id = vocab.find(entries_[i].word)) out[i] = *id;
  }
  return out;
}

Vocabulary build_vocab(std::span<const std::string> tokens, std::int64_t min_count) {
  VocabularyBuilder builder;
  for (const auto& t : tokens) builder.add(t);
  VocabularyOptions options;
  options.min_count = min_count;
  return builder.build(options);
}

NegativeSampler negative_table(const Vocabulary& vocab, double power) {
  std::vector<std::int64_t> counts;
  counts.reserve(vocab.size());
  for (const auto& e : vocab.entries()) counts.push_back(e.count);
  return NegativeSampler(counts, power);
}

// ---------------------------------------------------------------------------

Corpus::Corpus(std::vector<WordId> tokens, std::vector<std::size_t> line_offsets)
    : tokens_(std::move(tokens)), offsets_(std::move(line_offsets)) {
  if (offsets_.empty() || offsets_.front() != 0 || offsets_.back() != tokens_.size() ||
      !std::is_sorted(offsets_.begin(), offsets_.end())) {
    throw std::invalid_argument("corpus line offsets are inconsistent with the token array");
  }
}

std::vector<std::pair<std::size_t, std::size_t>> Corpus::shards(std::size_t n) const {
  n = std::max<std::size_t>(1, n);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t target = tokens_.size() * (s + 1) / n;
    std::size_t end = begin;
    if (s + 1 == n) {
      end = lines();
    } else {
      while (end < lines() && offsets_[end + 1] <= target) ++end;
    }
    out.emplace_back(begin, end);
    begin = end;
  }
  return out;
}

void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view)>& fn) {
  // gzread passes uncompressed files through unchanged.
  std::unique_ptr<gzFile_s, int (*)(gzFile)> file(gzopen(path.c_str(), "rb"), gzclose);
  if (!file) throw DataError("cannot open " + path.string());
  gzbuffer(file.get(), 1 << 20);
  std::vector<char> buf(1 << 20);
  std::string pending;
  for (;;) {
    const int got = gzread(file.get(), buf.data(), static_cast<unsigned>(buf.size()));
    if (got < 0) {
      int errnum = 0;
      const char* msg = gzerror(file.get(), &errnum);
      throw DataError("error reading " + path.string() + ": " + (msg ? msg : "unknown"));
    }
    if (got == 0) break;
    std::string_view chunk(buf.data(), static_cast<std::size_t>(got));
    std::size_t start = 0;
    for (;;) {
      const auto nl = chunk.find('\n', start);
      if (nl == std::string_view::npos) {
        pending.append(chunk.substr(start));
        break;
      }
      if (pending.empty()) {
        fn(chunk.substr(start, nl - start));
      } else {
        pending.append(chunk.substr(start, nl - start));
        fn(pending);
        pending.clear();
      }
      start = nl + 1;
    }
  }
  if (!pending.empty()) fn(pending);
}

LoadedCorpus load_corpus(const std::filesystem::path& path, const VocabularyOptions& options) {
  VocabularyBuilder builder;
  std::vector<WordId> provisional;
  std::vector<std::size_t> offsets{0};
  std::uint64_t invalid = 0;
  std::uint64_t lines = 0;
  for_each_line(path, [&](std::string_view line) {
    ++lines;
    for_each_token(line, [&](std::string_view tok) { provisional.push_back(builder.add(tok)); },
                   &invalid);
    offsets.push_back(provisional.size());
  });
  Vocabulary vocab = builder.build(options);
  const std::vector<WordId> map = builder.remap(vocab);

  std::vector<WordId> tokens;
  tokens.reserve(static_cast<std::size_t>(vocab.total_tokens()));
  std::vector<std::size_t> kept{0};
  kept.reserve(offsets.size());
  for (std::size_t l = 0; l + 1 < offsets.size(); ++l) {
    for (std::size_t i = offsets[l]; i < offsets[l + 1]; ++i) {
      const WordId id = map[static_cast<std::size_t>(provisional[i])];
      if (id >= 0) tokens.push_back(id);
    }
    kept.push_back(tokens.size());
  }
  provisional.clear();
  provisional.shrink_to_fit();
  return LoadedCorpus{std::move(vocab), Corpus(std::move(tokens), std::move(kept)), lines, invalid};
}

}  // namespace hsgns
