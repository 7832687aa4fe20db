#pragma once

#include <cstdint>
#include <string>

namespace crowdnav {

// Shortest decimal representation that parses back to the same double
// (std::to_chars). All file formats use this so that parse(format(x)) == x
// and repeated runs produce byte-identical files.
std::string format_double(double value);

// Like format_double but always includes a '.' or exponent, so JSON readers
// keep the value in floating point (preserves the sign of -0.0).
std::string format_json_number(double value);

// Strict full-string parse; throws ConfigError on trailing garbage.
double parse_double(const std::string& text);
long long parse_int(const std::string& text);
std::uint64_t parse_u64(const std::string& text);

// FNV-1a over the bytes, reported as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

// Writes via a temporary file in the same directory plus an atomic rename,
// so interrupted runs never leave a truncated file behind.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace crowdnav
