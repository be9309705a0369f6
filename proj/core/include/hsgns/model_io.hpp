#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "hsgns/embedding.hpp"

namespace hsgns {

enum class ModelFormat { text, binary };

std::string_view to_string(ModelFormat f) noexcept;
std::optional<ModelFormat> parse_model_format(std::string_view s) noexcept;

/// Text: a header line "minkowski-sgns <mode> <|V|> <ambient-dim> <theta>"
/// followed by "word c0 ... cn" rows printed with 17 significant digits.
/// The text layout has no room for the tied flag or the config echo.
///
/// Binary: magic "HSGNSBIN", u32 version, u8 mode, u8 tied, u16 zero, u64 |V|,
/// u64 width, f64 theta, u64-length-prefixed config, then |V| u32-length-
/// prefixed UTF-8 words and |V| x width doubles; all little-endian.
///
/// Throws DataError naming the path on I/O failure.
void save_model(const EmbeddingModel& model, const std::filesystem::path& path, ModelFormat format);

/// Peeks at the first bytes of the file.
ModelFormat detect_model_format(const std::filesystem::path& path);

/// Loads either format. Rejects a mode other than `expected` when given, a
/// mismatch between the declared and actual sizes, truncation, duplicate
/// words and hyperbolic rows off the hyperboloid by more than 1e-5 (the error
/// names the word). Coordinates are returned exactly as stored.
EmbeddingModel load_model(const std::filesystem::path& path,
                          std::optional<Geometry> expected = std::nullopt);

}  // namespace hsgns
