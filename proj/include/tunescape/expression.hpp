#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tunescape {

enum class ExprType { integer, real, boolean, string };

const char* to_string(ExprType type);

// Runtime value of an expression or a bound identifier.
using EvalValue = std::variant<std::int64_t, double, bool, std::string>;

struct Symbol {
  std::string name;
  ExprType type;
};

// A statically typed expression over a fixed symbol table.
//
// Grammar, lowest precedence first:
//   or      := and ( '||' and )*
//   and     := eq ( '&&' eq )*
//   eq      := rel ( ('==' | '!=') rel )*
//   rel     := add ( ('<' | '<=' | '>' | '>=') add )*
//   add     := mul ( ('+' | '-') mul )*
//   mul     := unary ( ('*' | '/' | '%') unary )*
//   unary   := ('-' | '!') unary | power
//   power   := primary ( '^' unary )?          (right associative)
//   primary := INT | REAL | STRING | 'true' | 'false' | IDENT | '(' or ')'
//
// Integer arithmetic is exact: overflow raises EvaluationError, '/' truncates toward zero.
// Any operand of type real promotes the operation to double. Strings support only '==' and '!='.
class Expression {
 public:
  // Throws SyntaxError (column relative to `source`) or SpecError for type/identifier problems.
  static Expression parse(std::string_view source, std::span<const Symbol> symbols);

  const std::string& source() const noexcept { return source_; }
  ExprType type() const noexcept;

  // Sorted, deduplicated indices into the symbol table.
  const std::vector<std::size_t>& referenced_symbols() const noexcept { return referenced_; }

  // `bindings[i]` holds the value of symbol i. Only referenced slots are read.
  EvalValue evaluate(std::span<const EvalValue> bindings) const;
  bool test(std::span<const EvalValue> bindings) const;
  double evaluate_number(std::span<const EvalValue> bindings) const;

 private:
  enum class Op : std::uint8_t {
    literal, symbol, neg, logical_not,
    add, sub, mul, div, mod, pow,
    eq, ne, lt, le, gt, ge,
    logical_and, logical_or,
  };
  struct Node {
    Op op;
    ExprType type;
    std::int32_t lhs = -1;
    std::int32_t rhs = -1;
    std::size_t symbol = 0;
    EvalValue literal;
  };

  friend class ExpressionParser;

  EvalValue eval(std::int32_t node, std::span<const EvalValue> bindings) const;

  std::string source_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
  std::vector<std::size_t> referenced_;
};

std::string format_value(const EvalValue& value);

}  // namespace tunescape
