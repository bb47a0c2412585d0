#pragma once

// Self-describing text container shared by law and model files:
//
//   <magic>
//   version=1
//   key=value
//   ...
//   checksum=<16 hex digits>
//   ---
//   payload line
//   ...
//
// The checksum is FNV-1a 64 over every other line (LF-terminated), in file order.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace llt {

inline constexpr int kArtifactVersion = 1;

struct ArtifactText {
    std::string magic;
    std::vector<std::pair<std::string, std::string>> header;  // excludes version and checksum
    std::vector<std::string> payload;
    bool checksum_ok = true;

    /// Throws ParseError("checksum mismatch") when the stored checksum did not match.
    void require_checksum() const;

    void set(std::string key, std::string value);
    std::optional<std::string> find(std::string_view key) const;
    /// Throws ParseError naming the key when absent.
    const std::string& get(std::string_view key) const;
};

std::string render_artifact(const ArtifactText& artifact);
/// Structural parse. A checksum mismatch is recorded in `checksum_ok` so callers can
/// report content errors first; call require_checksum() before using the result.
ArtifactText parse_artifact(std::string_view text, std::string_view expected_magic);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Shortest text that parses back to the identical double, padded to 17 significant digits.
std::string format_double(double value);
/// Strict parse: whole token must be consumed and the value finite.
std::optional<double> parse_double(std::string_view token);
double parse_double_or_throw(std::string_view token, std::string_view what);
long long parse_int_or_throw(std::string_view token, std::string_view what);

std::string join_doubles(std::span<const double> values, char sep = ' ');
std::vector<double> split_doubles(std::string_view line, char sep, std::string_view what);
std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

}  // namespace llt
