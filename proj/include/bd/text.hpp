#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

// Byte-level helpers shared by the corpus, prompt and rendering code.
namespace bd::text {

bool IsValidUtf8(std::string_view s);

// Unicode simple case folding. Invalid sequences are copied through.
std::string CaseFold(std::string_view s);

// Longest prefix holding at most max_codepoints code points.
std::string_view TruncateCodepoints(std::string_view s, std::size_t max_codepoints);

// Longest prefix of at most max_bytes that does not split a code point.
std::string_view TruncateBytes(std::string_view s, std::size_t max_bytes);

std::size_t CountCodepoints(std::string_view s);

// Common English function words.
bool IsStopword(std::string_view token);

std::string HtmlEscape(std::string_view s);

// Rounds half away from zero to the given number of decimals; never yields -0.
double RoundTo(double value, int decimals);
// Fixed-point text of RoundTo(value, decimals).
std::string FormatFixed(double value, int decimals);

uint64_t Fnv1a64(std::string_view s);

std::string Sha256Hex(std::string_view data);
// Throws kMissingInput when the file cannot be read.
std::string Sha256File(const std::filesystem::path& path);

// Current UTC time as RFC 3339. Honors SOURCE_DATE_EPOCH when set.
std::string UtcTimestamp();

}  // namespace bd::text
