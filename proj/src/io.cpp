#include "srplan/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "srplan/error.hpp"

namespace srplan::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorKind::io, "read failure on '" + path.string() + "'");
  }
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw Error(ErrorKind::io, "write failure on '" + path.string() + "'");
  }
}

json parse_json_strict(std::string_view text, std::string_view what) {
  // One key set per open object; arrays push an empty placeholder so the
  // stack depth tracks nesting.
  std::vector<std::set<std::string>> keys;
  std::vector<bool> is_object;
  std::string duplicate;

  json::parser_callback_t callback = [&](int /*depth*/, json::parse_event_t event,
                                         json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        keys.emplace_back();
        is_object.push_back(true);
        break;
      case json::parse_event_t::array_start:
        keys.emplace_back();
        is_object.push_back(false);
        break;
      case json::parse_event_t::object_end:
      case json::parse_event_t::array_end:
        if (!keys.empty()) {
          keys.pop_back();
          is_object.pop_back();
        }
        break;
      case json::parse_event_t::key:
        if (!keys.empty() && is_object.back()) {
          const auto key = parsed.get<std::string>();
          if (!keys.back().insert(key).second && duplicate.empty()) {
            duplicate = key;
          }
        }
        break;
      case json::parse_event_t::value:
        break;
    }
    return true;
  };

  json result;
  try {
    result = json::parse(text.begin(), text.end(), callback);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::format, std::string(what) + ": invalid JSON: " + e.what());
  }
  if (!duplicate.empty()) {
    throw Error(ErrorKind::validation,
                std::string(what) + ": duplicate key '" + duplicate + "'");
  }
  return result;
}

json load_json(const std::filesystem::path& path) {
  return parse_json_strict(read_file(path), path.string());
}

double round_sig(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) {
    return value;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

std::string format_number(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

json number_json(double value) {
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  if (std::isnan(value)) {
    return nullptr;
  }
  return round_sig(value);
}

double number_from_json(const json& value, std::string_view what) {
  if (value.is_number()) {
    return value.get<double>();
  }
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    if (s == "inf") {
      return std::numeric_limits<double>::infinity();
    }
    if (s == "-inf") {
      return -std::numeric_limits<double>::infinity();
    }
  }
  throw Error(ErrorKind::validation, std::string(what) + ": expected a number");
}

}  // namespace srplan::io
