#include "hsgns/model_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "hsgns/corpus.hpp"
#include "hsgns/errors.hpp"
#include "hsgns/geometry.hpp"

namespace hsgns {

namespace {

constexpr char kTextTag[] = "minkowski-sgns";
constexpr char kMagic[8] = {'H', 'S', 'G', 'N', 'S', 'B', 'I', 'N'};
constexpr std::uint32_t kBinaryVersion = 1;
constexpr double kConstraintTolerance = 1e-5;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw DataError(path.string() + ": " + what);
}

void append_double(std::string& out, double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  out.append(buf, r.ptr);
}

void validate_rows(const std::filesystem::path& path, const EmbeddingModel& model) {
  if (model.geometry() != Geometry::hyperbolic) return;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto r = model.vector(i);
    const double q = geometry::inplace::dot(r, r);
    if (!(std::abs(q + 1.0) <= kConstraintTolerance) || !(r.back() > 0.0)) {
      fail(path, "vector of word '" + model.word(i) + "' is off the hyperboloid (<x,x> = " +
                     std::to_string(q) + ")");
    }
  }
}

void check_mode(const std::filesystem::path& path, Geometry actual,
                std::optional<Geometry> expected) {
  if (expected && *expected != actual) {
    fail(path, "model is " + std::string(to_string(actual)) + ", expected " +
                   std::string(to_string(*expected)));
  }
}

// ---------------------------------------------------------------------------
// Little-endian encoding

class Writer {
 public:
  void u8(std::uint8_t x) { buf_.push_back(static_cast<char>(x)); }
  void u16(std::uint16_t x) { le(x, 2); }
  void u32(std::uint32_t x) { le(x, 4); }
  void u64(std::uint64_t x) { le(x, 8); }
  void f64(double x) { le(std::bit_cast<std::uint64_t>(x), 8); }
  void bytes(std::string_view s) { buf_.append(s); }
  const std::string& str() const noexcept { return buf_; }

 private:
  void le(std::uint64_t x, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
  }
  std::string buf_;
};

class Reader {
 public:
  Reader(const std::filesystem::path& path, std::string data)
      : path_(path), data_(std::move(data)) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string bytes(std::uint64_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  void need(std::uint64_t n) const {
    if (n > remaining()) fail(path_, "file is truncated");
  }
  std::uint64_t le(int n) {
    need(static_cast<std::uint64_t>(n));
    std::uint64_t x = 0;
    for (int i = 0; i < n; ++i) {
      x |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return x;
  }

  const std::filesystem::path& path_;
  std::string data_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(path, "read error");
  return data;
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.close();
  if (!out) fail(path, "write error");
}

// ---------------------------------------------------------------------------

void save_text(const EmbeddingModel& model, const std::filesystem::path& path) {
  const auto& m = model.vectors();
  std::string out;
  out.reserve(model.size() * (m.width() * 24 + 16) + 64);
  out += kTextTag;
  out += ' ';
  out += to_string(model.geometry());
  out += ' ' + std::to_string(model.size()) + ' ' + std::to_string(m.width()) + ' ';
  append_double(out, model.theta());
  out += '\n';
  for (std::size_t i = 0; i < model.size(); ++i) {
    out += model.word(i);
    for (double x : m.row(i)) {
      out += ' ';
      append_double(out, x);
    }
    out += '\n';
  }
  write_file(path, out);
}

void save_binary(const EmbeddingModel& model, const std::filesystem::path& path) {
  const auto& m = model.vectors();
  Writer w;
  w.bytes(std::string_view(kMagic, sizeof kMagic));
  w.u32(kBinaryVersion);
  w.u8(model.geometry() == Geometry::hyperbolic ? 0 : 1);
  w.u8(model.tied() ? 1 : 0);
  w.u16(0);
  w.u64(model.size());
  w.u64(m.width());
  w.f64(model.theta());
  w.u64(model.config().size());
  w.bytes(model.config());
  for (std::size_t i = 0; i < model.size(); ++i) {
    w.u32(static_cast<std::uint32_t>(model.word(i).size()));
    w.bytes(model.word(i));
  }
  for (double x : m.data()) w.f64(x);
  write_file(path, w.str());
}

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && end == s.data() + s.size();
}

EmbeddingModel load_text(const std::filesystem::path& path, std::optional<Geometry> expected) {
  std::optional<Geometry> mode;
  std::size_t rows = 0;
  std::size_t width = 0;
  double theta = 0.0;
  std::vector<std::string> words;
  std::vector<double> coords;
  std::size_t line_no = 0;
  for_each_line(path, [&](std::string_view line) {
    ++line_no;
    const auto f = fields_of(line);
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (line_no == 1) {
      if (f.size() != 5 || f[0] != kTextTag) {
        fail(path, where + "expected header '" + kTextTag + " <mode> <|V|> <dim> <theta>'");
      }
      mode = parse_geometry(f[1]);
      if (!mode) fail(path, where + "unknown mode '" + std::string(f[1]) + "'");
      check_mode(path, *mode, expected);
      if (!parse_number(f[2], rows) || !parse_number(f[3], width) || width == 0 ||
          (*mode == Geometry::hyperbolic && width < 2) || !parse_number(f[4], theta) ||
          !std::isfinite(theta)) {
        fail(path, where + "bad header values");
      }
      words.reserve(std::min<std::size_t>(rows, 1 << 20));
      return;
    }
    if (f.empty()) return;
    if (words.size() == rows) fail(path, where + "more rows than the declared " + std::to_string(rows));
    if (f.size() != width + 1) {
      fail(path, where + "expected a word and " + std::to_string(width) + " coordinates, got " +
                     std::to_string(f.size()) + " fields");
    }
    words.emplace_back(f[0]);
    for (std::size_t i = 1; i < f.size(); ++i) {
      double x = 0.0;
      if (!parse_number(f[i], x) || !std::isfinite(x)) {
        fail(path, where + "bad coordinate '" + std::string(f[i]) + "'");
      }
      coords.push_back(x);
    }
  });
  if (!mode) fail(path, "empty model file");
  if (words.size() != rows) {
    fail(path, "file is truncated: declared " + std::to_string(rows) + " rows, found " +
                   std::to_string(words.size()));
  }
  EmbeddingMatrix m(*mode, Layer::alpha, rows, width);
  std::copy(coords.begin(), coords.end(), m.data().begin());
  return EmbeddingModel(std::move(words), std::move(m), theta, false);
}

EmbeddingModel load_binary(const std::filesystem::path& path, std::optional<Geometry> expected) {
  Reader r(path, read_file(path));
  if (r.bytes(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) fail(path, "bad magic");
  const auto version = r.u32();
  if (version != kBinaryVersion) fail(path, "unsupported version " + std::to_string(version));
  const auto mode_byte = r.u8();
  if (mode_byte > 1) fail(path, "bad mode byte");
  const Geometry mode = mode_byte == 0 ? Geometry::hyperbolic : Geometry::euclidean;
  check_mode(path, mode, expected);
  const bool tied = r.u8() != 0;
  r.u16();
  const auto rows = r.u64();
  const auto width = r.u64();
  const double theta = r.f64();
  if (width == 0 || (mode == Geometry::hyperbolic && width < 2) || !std::isfinite(theta)) {
    fail(path, "bad header values");
  }
  // Each row needs at least its length prefix and coordinates.
  if (rows > r.remaining() / (4 + 8 * width)) fail(path, "file is truncated");
  const auto config_len = r.u64();
  if (config_len > r.remaining()) fail(path, "file is truncated");
  std::string config = r.bytes(config_len);
  std::vector<std::string> words;
  words.reserve(rows);
  for (std::uint64_t i = 0; i < rows; ++i) words.push_back(r.bytes(r.u32()));
  EmbeddingMatrix m(mode, tied ? Layer::tied : Layer::alpha, rows, width);
  for (double& x : m.data()) {
    x = r.f64();
    if (!std::isfinite(x)) fail(path, "non-finite coordinate");
  }
  if (r.remaining() != 0) fail(path, "trailing bytes after the last row");
  return EmbeddingModel(std::move(words), std::move(m), theta, tied, std::move(config));
}

}  // namespace

std::string_view to_string(ModelFormat f) noexcept {
  return f == ModelFormat::text ? "text" : "binary";
}

std::optional<ModelFormat> parse_model_format(std::string_view s) noexcept {
  if (s == "text") return ModelFormat::text;
  if (s == "binary") return ModelFormat::binary;
  return std::nullopt;
}

void save_model(const EmbeddingModel& model, const std::filesystem::path& path, ModelFormat format) {
  if (format == ModelFormat::text) {
    save_text(model, path);
  } else {
    save_binary(model, path);
  }
}

ModelFormat detect_model_format(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open for reading");
  char head[sizeof kMagic] = {};
  in.read(head, sizeof head);
  if (in.gcount() == sizeof head && std::memcmp(head, kMagic, sizeof kMagic) == 0) {
    return ModelFormat::binary;
  }
  return ModelFormat::text;
}

EmbeddingModel load_model(const std::filesystem::path& path, std::optional<Geometry> expected) {
  auto model = [&] {
    try {
      return detect_model_format(path) == ModelFormat::binary ? load_binary(path, expected)
                                                              : load_text(path, expected);
    } catch (const DataError& e) {
      if (std::string_view(e.what()).starts_with(path.string() + ":")) throw;
      fail(path, e.what());
    } catch (const std::exception& e) {
      fail(path, e.what());
    }
  }();
  validate_rows(path, model);
  return model;
}

}  // namespace hsgns
