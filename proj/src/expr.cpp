#include "zerolm/expr.hpp"

#include <algorithm>
#include <cctype>

#include "zerolm/error.hpp"

namespace zerolm {

// Recursive descent:
//   sum     := product (('+' | '-') product)*
//   product := unary ('*' unary)*
//   unary   := '-' unary | atom
//   atom    := integer | identifier | '(' sum ')'
class ExprParser {
public:
  ExprParser(std::string_view text, Expr &out) : text_(text), out_(out) {}

  void run() {
    sum();
    skip_ws();
    if (pos_ != text_.size())
      fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    if (out_.program_.empty())
      fail("empty expression");
  }

private:
  std::string_view text_;
  Expr &out_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string &why) const {
    throw ValidationError("expression '" + std::string(text_) + "'", why);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void emit(Expr::Op::Kind kind) { out_.program_.push_back({kind, 0, {}}); }

  void sum() {
    product();
    for (;;) {
      if (accept('+')) {
        product();
        emit(Expr::Op::add);
      } else if (accept('-')) {
        product();
        emit(Expr::Op::sub);
      } else {
        return;
      }
    }
  }

  void product() {
    unary();
    while (accept('*')) {
      unary();
      emit(Expr::Op::mul);
    }
  }

  void unary() {
    if (accept('-')) {
      unary();
      emit(Expr::Op::neg);
      return;
    }
    atom();
  }

  void atom() {
    skip_ws();
    if (pos_ >= text_.size())
      fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      sum();
      if (!accept(')'))
        fail("missing ')'");
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::int64_t value = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        if (__builtin_mul_overflow(value, 10, &value) ||
            __builtin_add_overflow(value, text_[pos_] - '0', &value))
          fail("integer literal overflows");
        ++pos_;
      }
      out_.program_.push_back({Expr::Op::literal, value, {}});
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string name(text_.substr(start, pos_ - start));
      if (std::find(out_.identifiers_.begin(), out_.identifiers_.end(), name) ==
          out_.identifiers_.end())
        out_.identifiers_.push_back(name);
      out_.program_.push_back({Expr::Op::identifier, 0, std::move(name)});
      return;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
};

Expr Expr::parse(std::string_view text) {
  Expr e;
  e.program_.clear();
  e.text_ = std::string(text);
  ExprParser(text, e).run();
  return e;
}

std::int64_t Expr::eval(const Resolver &resolve) const {
  std::vector<std::int64_t> stack;
  stack.reserve(program_.size());
  auto overflow = [&]() -> ValidationError {
    return ValidationError("expression '" + text_ + "'", "arithmetic overflow");
  };
  for (const Op &op : program_) {
    switch (op.kind) {
    case Op::literal:
      stack.push_back(op.value);
      break;
    case Op::identifier: {
      auto value = resolve(op.name);
      if (!value)
        throw ValidationError("expression '" + text_ + "'",
                              "unknown or non-integer identifier '" + op.name + "'");
      stack.push_back(*value);
      break;
    }
    case Op::neg:
      if (stack.back() == INT64_MIN)
        throw overflow();
      stack.back() = -stack.back();
      break;
    default: {
      const std::int64_t rhs = stack.back();
      stack.pop_back();
      std::int64_t &lhs = stack.back();
      bool bad = false;
      if (op.kind == Op::add)
        bad = __builtin_add_overflow(lhs, rhs, &lhs);
      else if (op.kind == Op::sub)
        bad = __builtin_sub_overflow(lhs, rhs, &lhs);
      else
        bad = __builtin_mul_overflow(lhs, rhs, &lhs);
      if (bad)
        throw overflow();
    }
    }
  }
  return stack.back();
}

} // namespace zerolm
