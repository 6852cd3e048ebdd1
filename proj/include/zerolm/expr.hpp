#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace zerolm {

/// Integer arithmetic over dimension names and constants, used by search-space
/// grammars to express matrix sizes ("ffn_dim", "ffn_stacks - 1", "2 * hidden").
/// Supports + - * and parentheses.
class Expr {
public:
  using Resolver = std::function<std::optional<std::int64_t>(std::string_view)>;

  /// The constant 1.
  Expr() : text_("1"), program_{{Op::literal, 1, {}}} {}

  /// Throws ValidationError on syntax errors.
  static Expr parse(std::string_view text);

  /// Throws ValidationError for unknown identifiers or arithmetic overflow.
  std::int64_t eval(const Resolver &resolve) const;

  const std::string &text() const noexcept { return text_; }
  /// Distinct identifiers in first-appearance order.
  const std::vector<std::string> &identifiers() const noexcept { return identifiers_; }

private:
  struct Op {
    enum Kind { literal, identifier, add, sub, mul, neg } kind;
    std::int64_t value = 0;
    std::string name;
  };

  std::string text_;
  std::vector<Op> program_; // postfix
  std::vector<std::string> identifiers_;

  friend class ExprParser;
};

} // namespace zerolm
