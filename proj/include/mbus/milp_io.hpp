#pragma once

#include <string>
#include <string_view>

#include "mbus/milp_model.hpp"

namespace mbus::milp {

enum class FileFormat { kLpText, kMpsFixed };

// How fixed MPS copes with names longer than its 8-character fields.
enum class MpsNames {
  // Long names are replaced by C0000001/R0000001 aliases; the full names are
  // kept in "* @name" comment lines so our own reader restores them.
  kAlias,
  // Long names are cut to 8 characters; a collision is an error.
  kTruncate,
};

class ParseError : public ModelError {
 public:
  ParseError(int line, const std::string& what)
      : ModelError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Numbers are written with %.12g; infinities as +inf / -inf.
std::string format_number(double v);

std::string export_model(const MilpModel& model, FileFormat format,
                         MpsNames names = MpsNames::kAlias);
MilpModel parse_model(std::string_view document, FileFormat format);

FileFormat parse_format_name(std::string_view name);

}  // namespace mbus::milp
