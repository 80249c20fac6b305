#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace pp {

using json = nlohmann::json;

std::string read_text_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, so readers never observe a
/// partially written artifact. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Canonical serialization used for every artifact: sorted keys, two-space
/// indent, shortest round-trip doubles, trailing newline.
std::string dump_json(const json& value);
void write_json_atomic(const std::filesystem::path& path, const json& value);
json read_json_file(const std::filesystem::path& path);

/// One compact JSON document per line.
std::string dump_jsonl(const std::vector<json>& rows);
std::vector<json> read_jsonl_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

/// Minimal CSV reader (RFC 4180 quoting). The first row is the header and
/// must match `expected_header` exactly.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               const std::vector<std::string>& expected_header);

/// Non-empty, non-comment (`#`) lines with surrounding whitespace trimmed.
std::vector<std::string> read_list_file(const std::filesystem::path& path);

std::string trim(std::string_view s);

}  // namespace pp
