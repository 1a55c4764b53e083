#include "riemap/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <string_view>

#include "riemap/errors.hpp"

namespace riemap {

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_constant(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Constant;
  n->value = v;
  return n;
}

NodePtr make_variable(int index) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Variable;
  n->variable = index;
  return n;
}

NodePtr make_unary(UnaryOp op, NodePtr operand) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Unary;
  n->unary = op;
  n->lhs = std::move(operand);
  return n;
}

NodePtr make_binary(BinaryOp op, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Binary;
  n->binary = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

struct FunctionName {
  std::string_view name;
  UnaryOp op;
};

constexpr FunctionName kFunctions[] = {
    {"exp", UnaryOp::Exp}, {"log", UnaryOp::Log}, {"sin", UnaryOp::Sin},
    {"cos", UnaryOp::Cos}, {"sqrt", UnaryOp::Sqrt},
};

const char* function_name(UnaryOp op) {
  for (const auto& f : kFunctions)
    if (f.op == op) return f.name.data();
  return "neg";
}

/// Recursive-descent parser.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?
///   primary := number | identifier | function '(' expr ')' | '(' expr ')'
class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& scope) : src_(src), scope_(scope) {}

  NodePtr parse() {
    skip_space();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "expression", "");
    NodePtr root = expr();
    skip_space();
    if (pos_ < src_.size()) throw SyntaxError(pos_, "operator or end of input", token_text());
    return root;
  }

 private:
  std::string_view src_;
  const std::vector<std::string>& scope_;
  std::size_t pos_ = 0;

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string token_text() const {
    if (pos_ >= src_.size()) return "";
    std::size_t end = pos_ + 1;
    if (std::isalnum(static_cast<unsigned char>(src_[pos_]))) {
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_' || src_[end] == '.'))
        ++end;
    }
    return std::string(src_.substr(pos_, end - pos_));
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(BinaryOp::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make_binary(BinaryOp::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(BinaryOp::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make_binary(BinaryOp::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_unary(UnaryOp::Neg, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_binary(BinaryOp::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "operand", "");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expr();
      if (!accept(')')) throw SyntaxError(pos_, "')'", token_text());
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw SyntaxError(pos_, "operand", token_text());
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    if (text == ".") throw SyntaxError(start, "number", text);
    return make_constant(std::strtod(text.c_str(), nullptr));
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));

    skip_space();
    const bool call = pos_ < src_.size() && src_[pos_] == '(';
    if (call) {
      for (const auto& f : kFunctions) {
        if (f.name == name) {
          ++pos_;
          NodePtr arg = expr();
          if (!accept(')')) throw SyntaxError(pos_, "')'", token_text());
          return make_unary(f.op, arg);
        }
      }
      throw UnknownIdentifier(name);
    }
    for (std::size_t i = 0; i < scope_.size(); ++i)
      if (scope_[i] == name) return make_variable(static_cast<int>(i));
    for (const auto& f : kFunctions)
      if (f.name == name) throw SyntaxError(pos_, "'('", token_text());
    throw UnknownIdentifier(name);
  }
};

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void render_node(const ExprNode& n, const std::vector<std::string>& scope, std::string& out) {
  switch (n.kind) {
    case ExprNode::Kind::Constant:
      if (std::signbit(n.value)) {
        out += "(-" + format_number(-n.value) + ")";
      } else {
        out += format_number(n.value);
      }
      return;
    case ExprNode::Kind::Variable:
      out += scope.at(static_cast<std::size_t>(n.variable));
      return;
    case ExprNode::Kind::Unary:
      if (n.unary == UnaryOp::Neg) {
        out += "(-";
        render_node(*n.lhs, scope, out);
        out += ")";
      } else {
        out += function_name(n.unary);
        out += "(";
        render_node(*n.lhs, scope, out);
        out += ")";
      }
      return;
    case ExprNode::Kind::Binary: {
      static constexpr const char* symbols[] = {" + ", " - ", " * ", " / ", "^"};
      out += "(";
      render_node(*n.lhs, scope, out);
      out += symbols[static_cast<int>(n.binary)];
      render_node(*n.rhs, scope, out);
      out += ")";
      return;
    }
  }
}

bool same_node(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprNode::Kind::Constant:
      return a.value == b.value && std::signbit(a.value) == std::signbit(b.value);
    case ExprNode::Kind::Variable:
      return a.variable == b.variable;
    case ExprNode::Kind::Unary:
      return a.unary == b.unary && same_node(*a.lhs, *b.lhs);
    case ExprNode::Kind::Binary:
      return a.binary == b.binary && same_node(*a.lhs, *b.lhs) && same_node(*a.rhs, *b.rhs);
  }
  return false;
}

bool has_variable(const ExprNode& n) {
  switch (n.kind) {
    case ExprNode::Kind::Constant: return false;
    case ExprNode::Kind::Variable: return true;
    case ExprNode::Kind::Unary: return has_variable(*n.lhs);
    case ExprNode::Kind::Binary: return has_variable(*n.lhs) || has_variable(*n.rhs);
  }
  return false;
}

Jet eval_node(const ExprNode& n, std::span<const Jet> vars, const Jet& zero) {
  switch (n.kind) {
    case ExprNode::Kind::Constant:
      return Jet(zero.space(), n.value);
    case ExprNode::Kind::Variable:
      return vars[static_cast<std::size_t>(n.variable)];
    case ExprNode::Kind::Unary: {
      Jet a = eval_node(*n.lhs, vars, zero);
      switch (n.unary) {
        case UnaryOp::Neg: return -a;
        case UnaryOp::Exp: return exp(a);
        case UnaryOp::Log: return log(a);
        case UnaryOp::Sin: return sin(a);
        case UnaryOp::Cos: return cos(a);
        case UnaryOp::Sqrt: return sqrt(a);
      }
      break;
    }
    case ExprNode::Kind::Binary: {
      Jet a = eval_node(*n.lhs, vars, zero);
      Jet b = eval_node(*n.rhs, vars, zero);
      switch (n.binary) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div: return a / b;
        case BinaryOp::Pow: return pow(a, b);
      }
      break;
    }
  }
  return zero;
}

bool is_integer_value(double v) { return std::isfinite(v) && std::floor(v) == v; }

double eval_double(const ExprNode& n, std::span<const double> vars) {
  switch (n.kind) {
    case ExprNode::Kind::Constant:
      return n.value;
    case ExprNode::Kind::Variable:
      return vars[static_cast<std::size_t>(n.variable)];
    case ExprNode::Kind::Unary: {
      const double a = eval_double(*n.lhs, vars);
      switch (n.unary) {
        case UnaryOp::Neg: return -a;
        case UnaryOp::Exp: return std::exp(a);
        case UnaryOp::Log:
          if (!(a > 0.0)) throw DomainError("log", a);
          return std::log(a);
        case UnaryOp::Sin: return std::sin(a);
        case UnaryOp::Cos: return std::cos(a);
        case UnaryOp::Sqrt:
          if (a < 0.0) throw DomainError("sqrt", a);
          return std::sqrt(a);
      }
      break;
    }
    case ExprNode::Kind::Binary: {
      const double a = eval_double(*n.lhs, vars);
      const double b = eval_double(*n.rhs, vars);
      switch (n.binary) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div:
          if (b == 0.0) throw DomainError("division", b);
          return a / b;
        case BinaryOp::Pow:
          if (is_integer_value(b)) {
            if (a == 0.0 && b < 0.0) throw DomainError("pow", a);
          } else if (!(a > 0.0)) {
            throw DomainError("pow", a);
          }
          return std::pow(a, b);
      }
      break;
    }
  }
  return 0.0;
}

}  // namespace

bool is_identifier(const std::string& name) {
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name[0]))) return false;
  for (char c : name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

Expression Expression::constant(double value, std::vector<std::string> scope) {
  return Expression(make_constant(value), std::move(scope));
}

std::string Expression::render() const {
  std::string out;
  render_node(*root_, scope_, out);
  return out;
}

bool Expression::same_tree(const Expression& other) const { return same_node(*root_, *other.root_); }

bool Expression::is_literal_constant() const { return !has_variable(*root_); }

Jet Expression::evaluate(std::span<const Jet> variables) const {
  if (variables.size() != scope_.size()) {
    throw Error(ErrorKind::Dimension, "expression expects " + std::to_string(scope_.size()) +
                                          " variables, got " + std::to_string(variables.size()));
  }
  if (variables.empty()) throw Error(ErrorKind::Dimension, "jet evaluation needs at least one variable");
  const Jet zero(variables[0].space(), 0.0);
  return eval_node(*root_, variables, zero);
}

double Expression::evaluate(std::span<const double> variables) const {
  if (variables.size() != scope_.size()) {
    throw Error(ErrorKind::Dimension, "expression expects " + std::to_string(scope_.size()) +
                                          " variables, got " + std::to_string(variables.size()));
  }
  return eval_double(*root_, variables);
}

Expression parse_expression(const std::string& source, const std::vector<std::string>& scope) {
  std::set<std::string> seen;
  for (const auto& name : scope) {
    if (!is_identifier(name)) throw Error(ErrorKind::Schema, "'" + name + "' is not a valid identifier");
    if (!seen.insert(name).second) throw Error(ErrorKind::Schema, "duplicate scope name '" + name + "'");
  }
  Parser parser(source, scope);
  return Expression(parser.parse(), scope);
}

Jet eval_jet(const Expression& expr, std::span<const double> point, int order,
             const std::map<std::string, double>& bindings, int order_cap) {
  if (order > order_cap) {
    throw Error(ErrorKind::OrderTooLarge, "jet order " + std::to_string(order) + " exceeds cap " +
                                              std::to_string(order_cap));
  }
  const auto& scope = expr.scope();
  if (point.size() > scope.size()) {
    throw Error(ErrorKind::Dimension, "point has more coordinates than the expression scope");
  }
  const int dim = static_cast<int>(point.size());
  std::vector<Jet> vars;
  vars.reserve(scope.size());
  for (int i = 0; i < dim; ++i) vars.push_back(Jet::variable(dim, order, i, point[static_cast<std::size_t>(i)]));
  for (std::size_t i = point.size(); i < scope.size(); ++i) {
    auto it = bindings.find(scope[i]);
    if (it == bindings.end()) throw UnknownIdentifier(scope[i]);
    vars.push_back(Jet::constant(dim, order, it->second));
  }
  if (vars.empty()) return Jet::constant(0, order, expr.evaluate(std::span<const double>{}));
  return expr.evaluate(vars);
}

double derivative_coefficient(const Jet& jet, const MultiIndex& alpha) { return jet.derivative(alpha); }

}  // namespace riemap
