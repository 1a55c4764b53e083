#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "riemap/jet.hpp"

namespace riemap {

/// Default ceiling on jet orders requested through eval_jet.
inline constexpr int kDefaultJetOrderCap = 4;

enum class UnaryOp { Neg, Exp, Log, Sin, Cos, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

/// Immutable expression tree node.
struct ExprNode {
  enum class Kind { Constant, Variable, Unary, Binary };

  Kind kind = Kind::Constant;
  double value = 0.0;  // Constant
  int variable = -1;   // Variable: index into the scope
  UnaryOp unary = UnaryOp::Neg;
  BinaryOp binary = BinaryOp::Add;
  std::shared_ptr<const ExprNode> lhs;  // Unary operand or Binary left
  std::shared_ptr<const ExprNode> rhs;  // Binary right
};

/// A parsed scalar expression together with the names it was parsed against.
class Expression {
 public:
  Expression() = default;
  Expression(std::shared_ptr<const ExprNode> root, std::vector<std::string> scope)
      : root_(std::move(root)), scope_(std::move(scope)) {}

  static Expression constant(double value, std::vector<std::string> scope = {});

  const ExprNode& root() const { return *root_; }
  const std::shared_ptr<const ExprNode>& root_ptr() const { return root_; }
  const std::vector<std::string>& scope() const noexcept { return scope_; }
  bool empty() const noexcept { return root_ == nullptr; }

  /// Fully parenthesised infix form that parses back to an equal tree.
  std::string render() const;

  /// Structural equality of the trees (scopes are not compared).
  bool same_tree(const Expression& other) const;

  /// True when no scope variable occurs in the tree.
  bool is_literal_constant() const;

  /// Evaluates with one jet per scope entry.
  Jet evaluate(std::span<const Jet> variables) const;

  /// Plain double evaluation.
  double evaluate(std::span<const double> variables) const;

 private:
  std::shared_ptr<const ExprNode> root_;
  std::vector<std::string> scope_;
};

/// Parses `source` over the names in `scope`.  Throws SyntaxError or
/// UnknownIdentifier.
Expression parse_expression(const std::string& source, const std::vector<std::string>& scope);

/// Evaluates `expr` as a jet of `order` at `point`.  The first point.size()
/// scope entries are coordinates; remaining scope names must be present in
/// `bindings` and are treated as constants.
/// Orders above `order_cap` raise OrderTooLarge.
Jet eval_jet(const Expression& expr, std::span<const double> point, int order,
             const std::map<std::string, double>& bindings = {},
             int order_cap = kDefaultJetOrderCap);

/// Raw partial derivative d^alpha f at the jet's base point.
double derivative_coefficient(const Jet& jet, const MultiIndex& alpha);

/// True when `name` matches [a-zA-Z][a-zA-Z0-9_]*.
bool is_identifier(const std::string& name);

}  // namespace riemap
