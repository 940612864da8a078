#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "cgbias/costfun.hpp"
#include "cgbias/flowsolve.hpp"

namespace cgbias {

inline constexpr int kInstanceSchema = 1;

// Malformed or invalid instance document. line/column are 1-based, 0 when unknown.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& message, std::string field = {}, std::size_t line = 0,
             std::size_t column = 0);
  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string field_;
  std::size_t line_, column_;
};

// Parses an instance document. `origin` prefixes error messages (usually the file name).
Instance parse_instance(const std::string& text, const std::string& origin = "<input>");
Instance load_instance(const std::string& path);
// Pretty-printed document with a trailing newline; byte-stable for equal instances.
std::string serialize_instance(const Instance& inst);

// Descriptor helpers, also used for command-line arguments.
CostModel parse_cost_descriptor(const std::string& json_text);
BiasSpec parse_bias_descriptor(const std::string& json_text);
std::string serialize_cost(const CostModel& c);
std::string serialize_bias(const BiasSpec& b);

}  // namespace cgbias
