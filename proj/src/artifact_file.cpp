#include "llt/artifact_file.hpp"

#include "llt/core.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace llt {

namespace {

constexpr std::string_view kSeparator = "---";

std::uint64_t checksum_lines(const std::vector<std::string>& lines) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& line : lines) {
        h = fnv1a64(line, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

}  // namespace

void ArtifactText::set(std::string key, std::string value) {
    for (auto& [k, v] : header) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    header.emplace_back(std::move(key), std::move(value));
}

std::optional<std::string> ArtifactText::find(std::string_view key) const {
    for (const auto& [k, v] : header)
        if (k == key) return v;
    return std::nullopt;
}

const std::string& ArtifactText::get(std::string_view key) const {
    for (const auto& [k, v] : header)
        if (k == key) return v;
    throw ParseError(fmt::format("{}: missing header field '{}'", magic, key));
}

void ArtifactText::require_checksum() const {
    if (!checksum_ok) throw ParseError(fmt::format("{}: checksum mismatch", magic));
}

std::string render_artifact(const ArtifactText& artifact) {
    std::vector<std::string> lines;
    lines.reserve(artifact.header.size() + artifact.payload.size() + 3);
    lines.push_back(artifact.magic);
    lines.push_back(fmt::format("version={}", kArtifactVersion));
    for (const auto& [k, v] : artifact.header) lines.push_back(k + "=" + v);
    lines.emplace_back(kSeparator);
    for (const auto& p : artifact.payload) lines.push_back(p);

    const std::uint64_t sum = checksum_lines(lines);
    std::string out;
    const std::size_t sep_index = 2 + artifact.header.size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i == sep_index) out += fmt::format("checksum={:016x}\n", sum);
        out += lines[i];
        out += '\n';
    }
    return out;
}

ArtifactText parse_artifact(std::string_view text, std::string_view expected_magic) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        pos = end + 1;
    }
    if (lines.empty() || lines.front() != expected_magic)
        throw ParseError(fmt::format("expected '{}' file", expected_magic));

    ArtifactText artifact;
    artifact.magic = lines.front();
    std::vector<std::string> covered{lines.front()};
    std::optional<std::string> stored_sum;
    bool seen_version = false;
    std::size_t i = 1;
    for (; i < lines.size() && lines[i] != kSeparator; ++i) {
        const auto eq = lines[i].find('=');
        if (eq == std::string::npos)
            throw ParseError(fmt::format("{}: line {}: expected key=value", expected_magic, i + 1));
        std::string key = lines[i].substr(0, eq);
        std::string value = lines[i].substr(eq + 1);
        if (key == "checksum") {
            stored_sum = value;
            continue;
        }
        covered.push_back(lines[i]);
        if (key == "version") {
            if (value != std::to_string(kArtifactVersion))
                throw ParseError(fmt::format("{}: version mismatch: file has {}, reader supports {}",
                                             expected_magic, value, kArtifactVersion));
            seen_version = true;
            continue;
        }
        artifact.header.emplace_back(std::move(key), std::move(value));
    }
    if (i == lines.size()) throw ParseError(fmt::format("{}: missing '---' separator", expected_magic));
    if (!seen_version) throw ParseError(fmt::format("{}: missing version tag", expected_magic));
    covered.push_back(lines[i]);
    for (++i; i < lines.size(); ++i) {
        if (i + 1 == lines.size() && lines[i].empty()) break;  // trailing newline
        covered.push_back(lines[i]);
        artifact.payload.push_back(lines[i]);
    }
    if (!stored_sum) throw ParseError(fmt::format("{}: missing checksum", expected_magic));
    artifact.checksum_ok = *stored_sum == fmt::format("{:016x}", checksum_lines(covered));
    return artifact;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    if (ec != std::errc{}) throw Error("cannot format double");
    return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view token) {
    token = trim(token);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

double parse_double_or_throw(std::string_view token, std::string_view what) {
    auto v = parse_double(token);
    if (!v) throw ParseError(fmt::format("{}: not a finite number: '{}'", what, token));
    return *v;
}

long long parse_int_or_throw(std::string_view token, std::string_view what) {
    token = trim(token);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw ParseError(fmt::format("{}: not an integer: '{}'", what, token));
    return value;
}

std::string join_doubles(std::span<const double> values, char sep) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += sep;
        out += format_double(values[i]);
    }
    return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        const std::size_t end = line.find(sep, pos);
        if (end == std::string_view::npos) {
            parts.push_back(line.substr(pos));
            break;
        }
        parts.push_back(line.substr(pos, end - pos));
        pos = end + 1;
    }
    return parts;
}

std::vector<double> split_doubles(std::string_view line, char sep, std::string_view what) {
    std::vector<double> out;
    for (auto part : split(line, sep)) out.push_back(parse_double_or_throw(part, what));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace llt
