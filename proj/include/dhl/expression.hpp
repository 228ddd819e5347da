#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dhl/error.hpp"

namespace dhl::expr {

/// Arithmetic expressions over x1..x8 and u with +, -, *, /, ^ and the
/// functions sqrt, abs, max, min, exp, sin, cos, pow. Binary operators are
/// left-associative (including ^); unary minus binds between * and ^.
class Expression {
 public:
  struct ParseError {
    std::string message;
    std::size_t offset = 0;  // byte offset into the source text
  };

  /// Returns the parsed expression or a diagnostic with byte offset.
  static std::optional<Expression> try_parse(std::string_view text, ParseError* err);

  /// Like try_parse but throws Error(validation) with the offset in the message.
  static Expression parse(std::string_view text);

  /// Evaluates at x (length >= the highest variable index used) and u.
  /// Domain violations (sqrt of a negative, division by zero, non-finite
  /// results) raise Error(domain) carrying the offending node's byte offset.
  double eval(std::span<const double> x, double u) const;

  /// Deterministic printer; parse(print()) reproduces the tree.
  std::string print() const;

  /// Partial derivative: var in 0..7 selects x_{var+1}, var = -1 selects u.
  /// max/min/abs differentiate by branch selection.
  Expression derivative(int var) const;

  /// Highest x-variable index used, as a count (0 when none).
  int max_var() const;
  bool uses_u() const;

  struct Node;  // arena node; defined in the implementation

 private:
  Expression() = default;
  std::shared_ptr<const std::vector<Node>> nodes_;
  int root_ = -1;

  friend struct ExprBuilder;
};

}  // namespace dhl::expr
