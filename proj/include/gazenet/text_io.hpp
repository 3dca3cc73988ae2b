#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

// Small helpers for the comma-separated and binary interchange files.
namespace gazenet::text_io {

std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

double parse_double(std::string_view s, std::string_view context);
long long parse_int(std::string_view s, std::string_view context);

// Shortest round-trip decimal representation.
std::string format_double(double v);

std::vector<std::string> read_lines(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

void append_f32_le(std::string& out, double v);
float read_f32_le(std::string_view bytes, std::size_t offset);

// 64-bit FNV-1a; used for config, plan and output hashes.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace gazenet::text_io
