#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace srplan::io {

using json = nlohmann::json;

/// Reads a whole file. Throws Error{io} when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, std::string_view contents);

/// Parses JSON and rejects duplicate object keys, which the default parser
/// silently collapses. Throws Error{format}.
json parse_json_strict(std::string_view text, std::string_view what);

json load_json(const std::filesystem::path& path);

/// Rounds to `digits` significant digits. Non-finite values pass through.
double round_sig(double value, int digits = 6);

/// Fixed report formatting: 6 significant digits, "inf"/"-inf"/"nan" spelled out.
std::string format_number(double value);

/// JSON encoding of a report number: rounded to 6 significant digits,
/// non-finite values become the strings "inf" / "-inf".
json number_json(double value);

/// Inverse of number_json for inputs that may carry "inf".
double number_from_json(const json& value, std::string_view what);

}  // namespace srplan::io
