#include "tunescape/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "tunescape/errors.hpp"

namespace tunescape {

const char* to_string(ExprType type) {
  switch (type) {
    case ExprType::integer: return "integer";
    case ExprType::real: return "real";
    case ExprType::boolean: return "boolean";
    case ExprType::string: return "string";
  }
  return "?";
}

std::string format_value(const EvalValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          return fmt::format("{}", v);
        }
      },
      value);
}

namespace {

enum class Tok {
  end, integer, real, string, ident,
  plus, minus, star, slash, percent, caret,
  eq, ne, lt, le, gt, ge, and_, or_, not_,
  lparen, rparen,
};

struct Token {
  Tok kind;
  std::string_view text;
  std::size_t column;  // 1-based
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    const std::size_t column = start + 1;
    if (pos_ >= src_.size()) return {Tok::end, {}, column};

    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < src_.size() &&
                                                        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      bool real = false;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (pos_ < src_.size() && src_[pos_] == '.') {
        real = true;
        ++pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t p = pos_ + 1;
        if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
        if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
          real = true;
          pos_ = p;
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
      }
      return {real ? Tok::real : Tok::integer, src_.substr(start, pos_ - start), column};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      return {Tok::ident, src_.substr(start, pos_ - start), column};
    }
    if (c == '"') {
      ++pos_;
      while (pos_ < src_.size() && src_[pos_] != '"') ++pos_;
      if (pos_ >= src_.size()) throw SyntaxError("unterminated string literal", 0, column);
      ++pos_;
      return {Tok::string, src_.substr(start + 1, pos_ - start - 2), column};
    }

    auto two = [&](char second) { return pos_ + 1 < src_.size() && src_[pos_ + 1] == second; };
    auto emit = [&](Tok kind, std::size_t len) {
      pos_ += len;
      return Token{kind, src_.substr(start, len), column};
    };
    switch (c) {
      case '+': return emit(Tok::plus, 1);
      case '-': return emit(Tok::minus, 1);
      case '*': return emit(Tok::star, 1);
      case '/': return emit(Tok::slash, 1);
      case '%': return emit(Tok::percent, 1);
      case '^': return emit(Tok::caret, 1);
      case '(': return emit(Tok::lparen, 1);
      case ')': return emit(Tok::rparen, 1);
      case '=':
        if (two('=')) return emit(Tok::eq, 2);
        break;
      case '!': return two('=') ? emit(Tok::ne, 2) : emit(Tok::not_, 1);
      case '<': return two('=') ? emit(Tok::le, 2) : emit(Tok::lt, 1);
      case '>': return two('=') ? emit(Tok::ge, 2) : emit(Tok::gt, 1);
      case '&':
        if (two('&')) return emit(Tok::and_, 2);
        break;
      case '|':
        if (two('|')) return emit(Tok::or_, 2);
        break;
      default: break;
    }
    throw SyntaxError(fmt::format("unexpected character '{}'", c), 0, column);
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
};

bool is_numeric(ExprType t) { return t == ExprType::integer || t == ExprType::real; }

// Takes the result by pointer: the overflow builtin must run before the value is read.
std::int64_t checked(bool overflow, const std::int64_t* value, const char* op) {
  if (overflow) throw EvaluationError(fmt::format("integer overflow in '{}'", op));
  return *value;
}

std::int64_t ipow(std::int64_t base, std::int64_t exponent) {
  if (exponent < 0) throw EvaluationError("negative exponent in integer power");
  std::int64_t result = 1;
  while (exponent > 0) {
    if (exponent & 1) result = checked(__builtin_mul_overflow(result, base, &result), &result, "^");
    exponent >>= 1;
    if (exponent > 0) base = checked(__builtin_mul_overflow(base, base, &base), &base, "^");
  }
  return result;
}

double as_double(const EvalValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

}  // namespace

class ExpressionParser {
 public:
  ExpressionParser(std::string_view src, std::span<const Symbol> symbols, Expression& out)
      : lexer_(src), symbols_(symbols), out_(out) {
    advance();
  }

  std::int32_t parse() {
    const std::int32_t root = parse_or();
    if (current_.kind != Tok::end) fail(fmt::format("unexpected '{}'", current_.text));
    return root;
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& message) const {
    throw SyntaxError(message, 0, current_.column);
  }
  [[noreturn]] void type_error(const std::string& message, std::size_t column) const {
    throw SpecError(fmt::format("type error at column {}: {}", column, message));
  }

  void advance() { current_ = lexer_.next(); }

  ExprType type_of(std::int32_t n) const { return out_.nodes_[static_cast<std::size_t>(n)].type; }

  std::int32_t add(Expression::Node node) {
    out_.nodes_.push_back(std::move(node));
    return static_cast<std::int32_t>(out_.nodes_.size() - 1);
  }

  std::int32_t binary(Op op, std::int32_t lhs, std::int32_t rhs, std::size_t column,
                      std::string_view text) {
    const ExprType lt = type_of(lhs);
    const ExprType rt = type_of(rhs);
    ExprType result = ExprType::boolean;
    switch (op) {
      case Op::add: case Op::sub: case Op::mul: case Op::div: case Op::pow:
        if (!is_numeric(lt) || !is_numeric(rt))
          type_error(fmt::format("'{}' needs numeric operands, got {} and {}", text, to_string(lt),
                                 to_string(rt)), column);
        result = (lt == ExprType::real || rt == ExprType::real) ? ExprType::real : ExprType::integer;
        break;
      case Op::mod:
        if (lt != ExprType::integer || rt != ExprType::integer)
          type_error("'%' needs integer operands", column);
        result = ExprType::integer;
        break;
      case Op::eq: case Op::ne:
        if (!(is_numeric(lt) && is_numeric(rt)) && lt != rt)
          type_error(fmt::format("cannot compare {} with {}", to_string(lt), to_string(rt)), column);
        break;
      case Op::lt: case Op::le: case Op::gt: case Op::ge:
        if (!is_numeric(lt) || !is_numeric(rt))
          type_error(fmt::format("'{}' needs numeric operands, got {} and {}", text, to_string(lt),
                                 to_string(rt)), column);
        break;
      case Op::logical_and: case Op::logical_or:
        if (lt != ExprType::boolean || rt != ExprType::boolean)
          type_error(fmt::format("'{}' needs boolean operands", text), column);
        break;
      default: break;
    }
    return add({op, result, lhs, rhs, 0, {}});
  }

  std::int32_t parse_or() {
    std::int32_t lhs = parse_and();
    while (current_.kind == Tok::or_) {
      const Token t = current_;
      advance();
      lhs = binary(Op::logical_or, lhs, parse_and(), t.column, t.text);
    }
    return lhs;
  }

  std::int32_t parse_and() {
    std::int32_t lhs = parse_eq();
    while (current_.kind == Tok::and_) {
      const Token t = current_;
      advance();
      lhs = binary(Op::logical_and, lhs, parse_eq(), t.column, t.text);
    }
    return lhs;
  }

  std::int32_t parse_eq() {
    std::int32_t lhs = parse_rel();
    while (current_.kind == Tok::eq || current_.kind == Tok::ne) {
      const Token t = current_;
      advance();
      lhs = binary(t.kind == Tok::eq ? Op::eq : Op::ne, lhs, parse_rel(), t.column, t.text);
    }
    return lhs;
  }

  std::int32_t parse_rel() {
    std::int32_t lhs = parse_add();
    for (;;) {
      Op op;
      switch (current_.kind) {
        case Tok::lt: op = Op::lt; break;
        case Tok::le: op = Op::le; break;
        case Tok::gt: op = Op::gt; break;
        case Tok::ge: op = Op::ge; break;
        default: return lhs;
      }
      const Token t = current_;
      advance();
      lhs = binary(op, lhs, parse_add(), t.column, t.text);
    }
  }

  std::int32_t parse_add() {
    std::int32_t lhs = parse_mul();
    while (current_.kind == Tok::plus || current_.kind == Tok::minus) {
      const Token t = current_;
      advance();
      lhs = binary(t.kind == Tok::plus ? Op::add : Op::sub, lhs, parse_mul(), t.column, t.text);
    }
    return lhs;
  }

  std::int32_t parse_mul() {
    std::int32_t lhs = parse_unary();
    for (;;) {
      Op op;
      switch (current_.kind) {
        case Tok::star: op = Op::mul; break;
        case Tok::slash: op = Op::div; break;
        case Tok::percent: op = Op::mod; break;
        default: return lhs;
      }
      const Token t = current_;
      advance();
      lhs = binary(op, lhs, parse_unary(), t.column, t.text);
    }
  }

  std::int32_t parse_unary() {
    if (current_.kind == Tok::minus) {
      const Token t = current_;
      advance();
      const std::int32_t operand = parse_unary();
      if (!is_numeric(type_of(operand))) type_error("unary '-' needs a numeric operand", t.column);
      return add({Op::neg, type_of(operand), operand, -1, 0, {}});
    }
    if (current_.kind == Tok::not_) {
      const Token t = current_;
      advance();
      const std::int32_t operand = parse_unary();
      if (type_of(operand) != ExprType::boolean) type_error("'!' needs a boolean operand", t.column);
      return add({Op::logical_not, ExprType::boolean, operand, -1, 0, {}});
    }
    return parse_power();
  }

  std::int32_t parse_power() {
    const std::int32_t base = parse_primary();
    if (current_.kind != Tok::caret) return base;
    const Token t = current_;
    advance();
    return binary(Op::pow, base, parse_unary(), t.column, t.text);
  }

  std::int32_t parse_primary() {
    const Token t = current_;
    switch (t.kind) {
      case Tok::integer: {
        std::int64_t v = 0;
        const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc{} || ptr != t.text.data() + t.text.size())
          fail(fmt::format("integer literal '{}' out of range", t.text));
        advance();
        return add({Op::literal, ExprType::integer, -1, -1, 0, v});
      }
      case Tok::real: {
        double v = 0;
        const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc{} || ptr != t.text.data() + t.text.size())
          fail(fmt::format("bad real literal '{}'", t.text));
        advance();
        return add({Op::literal, ExprType::real, -1, -1, 0, v});
      }
      case Tok::string:
        advance();
        return add({Op::literal, ExprType::string, -1, -1, 0, std::string(t.text)});
      case Tok::ident: {
        advance();
        if (t.text == "true" || t.text == "false")
          return add({Op::literal, ExprType::boolean, -1, -1, 0, t.text == "true"});
        const auto it = std::find_if(symbols_.begin(), symbols_.end(),
                                     [&](const Symbol& s) { return s.name == t.text; });
        if (it == symbols_.end())
          throw SpecError(fmt::format("unknown identifier '{}' at column {}", t.text, t.column));
        const auto slot = static_cast<std::size_t>(it - symbols_.begin());
        out_.referenced_.push_back(slot);
        return add({Op::symbol, it->type, -1, -1, slot, {}});
      }
      case Tok::lparen: {
        advance();
        const std::int32_t inner = parse_or();
        if (current_.kind != Tok::rparen) fail("expected ')'");
        advance();
        return inner;
      }
      case Tok::end: fail("unexpected end of expression");
      default: fail(fmt::format("unexpected '{}'", t.text));
    }
  }

  Lexer lexer_;
  std::span<const Symbol> symbols_;
  Expression& out_;
  Token current_{Tok::end, {}, 0};
};

Expression Expression::parse(std::string_view source, std::span<const Symbol> symbols) {
  Expression expr;
  expr.source_ = std::string(source);
  ExpressionParser parser(expr.source_, symbols, expr);
  expr.root_ = parser.parse();
  std::sort(expr.referenced_.begin(), expr.referenced_.end());
  expr.referenced_.erase(std::unique(expr.referenced_.begin(), expr.referenced_.end()),
                         expr.referenced_.end());
  return expr;
}

ExprType Expression::type() const noexcept { return nodes_[static_cast<std::size_t>(root_)].type; }

EvalValue Expression::evaluate(std::span<const EvalValue> bindings) const {
  try {
    return eval(root_, bindings);
  } catch (const EvaluationError& e) {
    throw EvaluationError(fmt::format("{} in expression '{}'", e.what(), source_));
  }
}

bool Expression::test(std::span<const EvalValue> bindings) const {
  const EvalValue v = evaluate(bindings);
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw EvaluationError(fmt::format("expression '{}' is not boolean", source_));
}

double Expression::evaluate_number(std::span<const EvalValue> bindings) const {
  const EvalValue v = evaluate(bindings);
  if (std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v)) return as_double(v);
  throw EvaluationError(fmt::format("expression '{}' is not numeric", source_));
}

EvalValue Expression::eval(std::int32_t index, std::span<const EvalValue> bindings) const {
  const Node& n = nodes_[static_cast<std::size_t>(index)];
  switch (n.op) {
    case Op::literal: return n.literal;
    case Op::symbol: {
      const EvalValue& v = bindings[n.symbol];
      // Bindings may carry integers for symbols declared real (e.g. an integral time).
      if (n.type == ExprType::real && std::holds_alternative<std::int64_t>(v)) return as_double(v);
      return v;
    }
    case Op::neg: {
      const EvalValue v = eval(n.lhs, bindings);
      if (const auto* i = std::get_if<std::int64_t>(&v)) {
        std::int64_t r = 0;
        return checked(__builtin_sub_overflow(std::int64_t{0}, *i, &r), &r, "-");
      }
      return -std::get<double>(v);
    }
    case Op::logical_not: return !std::get<bool>(eval(n.lhs, bindings));
    case Op::logical_and:
      return std::get<bool>(eval(n.lhs, bindings)) && std::get<bool>(eval(n.rhs, bindings));
    case Op::logical_or:
      return std::get<bool>(eval(n.lhs, bindings)) || std::get<bool>(eval(n.rhs, bindings));
    default: break;
  }

  const EvalValue a = eval(n.lhs, bindings);
  const EvalValue b = eval(n.rhs, bindings);
  const auto* ai = std::get_if<std::int64_t>(&a);
  const auto* bi = std::get_if<std::int64_t>(&b);
  const bool ints = ai != nullptr && bi != nullptr;

  switch (n.op) {
    case Op::add: {
      if (!ints) return as_double(a) + as_double(b);
      std::int64_t r = 0;
      return checked(__builtin_add_overflow(*ai, *bi, &r), &r, "+");
    }
    case Op::sub: {
      if (!ints) return as_double(a) - as_double(b);
      std::int64_t r = 0;
      return checked(__builtin_sub_overflow(*ai, *bi, &r), &r, "-");
    }
    case Op::mul: {
      if (!ints) return as_double(a) * as_double(b);
      std::int64_t r = 0;
      return checked(__builtin_mul_overflow(*ai, *bi, &r), &r, "*");
    }
    case Op::div:
      if (ints) {
        if (*bi == 0) throw EvaluationError("division by zero");
        if (*ai == std::numeric_limits<std::int64_t>::min() && *bi == -1)
          throw EvaluationError("integer overflow in '/'");
        return *ai / *bi;
      }
      if (as_double(b) == 0.0) throw EvaluationError("division by zero");
      return as_double(a) / as_double(b);
    case Op::mod:
      if (*bi == 0) throw EvaluationError("modulo by zero");
      if (*bi == -1) return std::int64_t{0};
      return *ai % *bi;
    case Op::pow:
      if (ints) return ipow(*ai, *bi);
      return std::pow(as_double(a), as_double(b));
    case Op::eq:
    case Op::ne: {
      bool equal = false;
      if (ints) {
        equal = *ai == *bi;
      } else if ((ai || std::holds_alternative<double>(a)) && (bi || std::holds_alternative<double>(b))) {
        equal = as_double(a) == as_double(b);
      } else {
        equal = a == b;
      }
      return n.op == Op::eq ? equal : !equal;
    }
    case Op::lt: return ints ? *ai < *bi : as_double(a) < as_double(b);
    case Op::le: return ints ? *ai <= *bi : as_double(a) <= as_double(b);
    case Op::gt: return ints ? *ai > *bi : as_double(a) > as_double(b);
    case Op::ge: return ints ? *ai >= *bi : as_double(a) >= as_double(b);
    default: break;
  }
  throw EvaluationError("corrupt expression tree");
}

}  // namespace tunescape
