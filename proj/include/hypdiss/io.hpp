#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace hypdiss {

// 17 significant digits, round-trip exact.
[[nodiscard]] std::string format_double(double x);

// Comma-separated row of doubles formatted with format_double.
[[nodiscard]] std::string csv_row(const std::vector<double>& values);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& doc);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);

}  // namespace hypdiss
