#pragma once

// Line-oriented JSON reading shared by the file loaders.

#include <algorithm>
#include <cctype>
#include <istream>
#include <string>

#include <json.hpp>

#include "perseval/errors.hpp"

namespace perseval::detail {

using nlohmann::json;

inline std::string required_string(const json& obj, const char* field, const std::string& source,
                            std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string())
    throw ParseError(source, line, std::string("missing or non-string field '") + field + "'");
  return it->get<std::string>();
}

inline int required_int(const json& obj, const char* field, const std::string& source,
                 std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_number_integer())
    throw ParseError(source, line, std::string("missing or non-integer field '") + field + "'");
  return it->get<int>();
}

inline bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

template <typename Fn>
void for_each_json_line(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, number, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(source, number, "record is not a JSON object");
    try {
      fn(obj, number);
    } catch (const ParseError&) {
      throw;
    } catch (const DuplicateKeyError& e) {
      throw DuplicateKeyError(source + ":" + std::to_string(number) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

}  // namespace perseval::detail
