#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "affmetric/formula.hpp"

namespace affmetric {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct Parsed {
  Formula formula;
  // Free variables in order of first occurrence.
  std::vector<VarId> free;
};

// Parses one formula. Symbols never bound become fresh free variables named
// after the symbol.
Parsed parse_formula(std::string_view text);
// Parses with a fixed free-variable list: symbols must be bound or named by
// one of the declared variables, otherwise "unbound variable" is raised.
Formula parse_formula(std::string_view text, const std::vector<VarId>& declared);

// Canonical single-line text. Binder names are unique across the output and
// never collide with free-variable names.
std::string serialize(const Formula& f);

// Formula file: lines starting with ';' are comments, except an optional
// "; free: v1 v2 ..." header fixing the free-variable order. Without a
// header the order is that of first occurrence.
Parsed parse_formula_file(std::string_view text);
// Header listing free, then the serialized formula.
std::string format_formula_file(const Formula& f, const std::vector<VarId>& free);

}  // namespace affmetric
