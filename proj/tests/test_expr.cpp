#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "riemap/errors.hpp"
#include "riemap/expr.hpp"

using namespace riemap;

namespace {

const std::vector<std::string> kXyz = {"x1", "x2", "x3"};

MultiIndex idx(std::initializer_list<int> a) { return MultiIndex(a); }

// Random expressions that stay inside every function's domain: log, sqrt,
// division and non-integer powers only ever see 1.5 + u*u.
std::string random_expression(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 11);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  auto sub = [&] { return random_expression(rng, depth - 1); };
  auto positive = [&] {
    const std::string u = sub();
    return "(1.5 + (" + u + ")*(" + u + "))";
  };
  switch (pick(rng)) {
    case 0: return kXyz[std::uniform_int_distribution<std::size_t>(0, 2)(rng)];
    case 1: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", coef(rng));
      return std::string("(") + buf + ")";
    }
    case 2: return "(" + sub() + " + " + sub() + ")";
    case 3: return "(" + sub() + " - " + sub() + ")";
    case 4: return "(" + sub() + " * " + sub() + ")";
    case 5: return "(" + sub() + " / " + positive() + ")";
    case 6: return "sin(" + sub() + ")";
    case 7: return "cos(" + sub() + ")";
    case 8: return "exp(sin(" + sub() + "))";
    case 9: return "log(" + positive() + ")";
    case 10: return "sqrt(" + positive() + ")";
    default: {
      if (std::uniform_int_distribution<int>(0, 1)(rng) == 0) return "(" + sub() + ")^3";
      return positive() + "^(0.5*sin(" + sub() + "))";
    }
  }
}

bool close(double actual, double expected, double rel, double abs) {
  return std::fabs(actual - expected) <= std::max(abs, rel * std::fabs(expected));
}

}  // namespace

TEST(Parse, ExponentialOfScaledCoordinate) {
  const Expression e = parse_expression("exp(2*x3)", kXyz);
  const auto& root = e.root();
  ASSERT_EQ(root.kind, ExprNode::Kind::Unary);
  EXPECT_EQ(root.unary, UnaryOp::Exp);
  const auto& mul = *root.lhs;
  ASSERT_EQ(mul.kind, ExprNode::Kind::Binary);
  EXPECT_EQ(mul.binary, BinaryOp::Mul);
  EXPECT_EQ(mul.lhs->kind, ExprNode::Kind::Constant);
  EXPECT_EQ(mul.lhs->value, 2.0);
  EXPECT_EQ(mul.rhs->kind, ExprNode::Kind::Variable);
  EXPECT_EQ(mul.rhs->variable, 2);
}

TEST(Parse, NormalisedSumMapComponent) {
  const Expression e = parse_expression("(x1+x2+x3)/sqrt(3)", kXyz);
  const auto& root = e.root();
  ASSERT_EQ(root.kind, ExprNode::Kind::Binary);
  EXPECT_EQ(root.binary, BinaryOp::Div);
  EXPECT_EQ(root.rhs->kind, ExprNode::Kind::Unary);
  EXPECT_EQ(root.rhs->unary, UnaryOp::Sqrt);
  // Left-associative sum: (x1 + x2) + x3.
  const auto& sum = *root.lhs;
  EXPECT_EQ(sum.binary, BinaryOp::Add);
  EXPECT_EQ(sum.rhs->variable, 2);
  EXPECT_EQ(sum.lhs->binary, BinaryOp::Add);
  const std::vector<double> p = {0.1, 0.2, 0.3};
  EXPECT_NEAR(e.evaluate(std::span<const double>(p)), 0.6 / std::sqrt(3.0), 1e-15);
}

TEST(Parse, RejectsUndeclaredName) {
  try {
    parse_expression("x1 + y1", {"x1", "x2"});
    FAIL() << "expected UnknownIdentifier";
  } catch (const UnknownIdentifier& e) {
    EXPECT_EQ(e.name(), "y1");
  }
}

TEST(Parse, ReportsSyntaxPosition) {
  try {
    parse_expression("x1 + * x2", kXyz);
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.position(), 5u);
  }
  EXPECT_THROW(parse_expression("", kXyz), SyntaxError);
  EXPECT_THROW(parse_expression("sin x1", kXyz), SyntaxError);
  EXPECT_THROW(parse_expression("tan(x1)", kXyz), UnknownIdentifier);
}

TEST(Parse, PrecedenceAndAssociativity) {
  const std::vector<double> p = {2.0, 3.0, 0.5};
  auto val = [&](const std::string& s) { return parse_expression(s, kXyz).evaluate(std::span<const double>(p)); };
  EXPECT_DOUBLE_EQ(val("-x1^2"), -4.0);
  EXPECT_DOUBLE_EQ(val("x1^x2^2"), std::pow(2.0, 9.0));
  EXPECT_DOUBLE_EQ(val("x2 - x1 - x3"), 0.5);
  EXPECT_DOUBLE_EQ(val("x2 / x1 / x3"), 3.0);
  EXPECT_DOUBLE_EQ(val("2^-1"), 0.5);
  EXPECT_DOUBLE_EQ(val("1.5e1 + 2"), 17.0);
}

TEST(Parse, RoundTripOnRandomExpressions) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const std::string src = random_expression(rng, 5);
    const Expression a = parse_expression(src, kXyz);
    const Expression b = parse_expression(a.render(), kXyz);
    ASSERT_TRUE(a.same_tree(b)) << src << "\n" << a.render();
    EXPECT_EQ(a.render(), b.render());
  }
  const Expression neg = parse_expression("-3 * x1 - (-2.5)", kXyz);
  EXPECT_TRUE(neg.same_tree(parse_expression(neg.render(), kXyz)));
}

TEST(EvalJet, ExponentialTaylorCoefficients) {
  const Expression e = parse_expression("exp(2*x3)", kXyz);
  const std::vector<double> p = {0.0, 0.0, 0.0};
  const Jet j = eval_jet(e, p, 2);
  EXPECT_DOUBLE_EQ(j.coefficient(idx({0, 0, 0})), 1.0);
  EXPECT_DOUBLE_EQ(j.coefficient(idx({0, 0, 1})), 2.0);
  EXPECT_DOUBLE_EQ(j.coefficient(idx({0, 0, 2})), 2.0);
  EXPECT_DOUBLE_EQ(j.coefficient(idx({1, 0, 0})), 0.0);
  EXPECT_DOUBLE_EQ(j.coefficient(idx({1, 0, 1})), 0.0);
  EXPECT_DOUBLE_EQ(derivative_coefficient(j, idx({0, 0, 2})), 4.0);
  EXPECT_DOUBLE_EQ(derivative_coefficient(j, idx({0, 0, 0})), 1.0);
}

TEST(EvalJet, ConstantHasNoHigherCoefficients) {
  const Expression e = parse_expression("3", kXyz);
  const std::vector<double> p = {0.4, -1.0, 2.0};
  const Jet j = eval_jet(e, p, 3);
  EXPECT_EQ(j.value(), 3.0);
  const auto c = j.coefficients();
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_EQ(c[i], 0.0);
  EXPECT_TRUE(j.is_constant());
}

TEST(EvalJet, CubeSecondDerivative) {
  const Expression e = parse_expression("x1^3", {"x1"});
  const std::vector<double> p = {2.0};
  const Jet j = eval_jet(e, p, 3);
  // Symbolic oracle: d/dx x^3 = 3x^2, d2 = 6x, d3 = 6.
  EXPECT_DOUBLE_EQ(derivative_coefficient(j, idx({1})), 12.0);
  EXPECT_DOUBLE_EQ(derivative_coefficient(j, idx({2})), 12.0);
  EXPECT_DOUBLE_EQ(derivative_coefficient(j, idx({3})), 6.0);
}

TEST(EvalJet, SinCosAgainstCentralDifference) {
  const Expression e = parse_expression("sin(x1)*cos(x1)", {"x1"});
  const double x = 0.7, h = 1e-5;
  const std::vector<double> p = {x};
  const Jet j = eval_jet(e, p, 1);
  const double fd = (std::sin(x + h) * std::cos(x + h) - std::sin(x - h) * std::cos(x - h)) / (2 * h);
  EXPECT_TRUE(close(j.coefficient(idx({1})), fd, 1e-9, 0.0));
  EXPECT_NEAR(j.coefficient(idx({1})), std::cos(2 * x), 1e-14);
}

TEST(EvalJet, OrderAndDomainErrors) {
  const Expression e = parse_expression("x1", {"x1"});
  const std::vector<double> p = {1.0};
  EXPECT_THROW(eval_jet(e, p, 5), Error);
  try {
    eval_jet(e, p, 5);
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::OrderTooLarge);
  }
  const Jet j = eval_jet(e, p, 2);
  try {
    derivative_coefficient(j, idx({3}));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::OrderExceeded);
  }
  const std::vector<double> neg = {-1.0};
  EXPECT_THROW(eval_jet(parse_expression("log(x1)", {"x1"}), neg, 1), DomainError);
  EXPECT_THROW(eval_jet(parse_expression("sqrt(x1)", {"x1"}), neg, 1), DomainError);
  EXPECT_THROW(eval_jet(parse_expression("x1^x1", {"x1"}), neg, 1), DomainError);
  EXPECT_THROW(eval_jet(parse_expression("x1^0.5", {"x1"}), neg, 1), DomainError);
  EXPECT_NO_THROW(eval_jet(parse_expression("x1^3", {"x1"}), neg, 2));
  const std::vector<double> zero = {0.0};
  EXPECT_THROW(eval_jet(parse_expression("1/x1", {"x1"}), zero, 1), DomainError);
}

TEST(EvalJet, ParameterBindings) {
  const Expression e = parse_expression("w*x1", {"x1", "w"});
  const std::vector<double> p = {2.0};
  const Jet j = eval_jet(e, p, 1, {{"w", 3.0}});
  EXPECT_EQ(j.dim(), 1);
  EXPECT_DOUBLE_EQ(j.value(), 6.0);
  EXPECT_DOUBLE_EQ(derivative_coefficient(j, idx({1})), 3.0);
  EXPECT_THROW(eval_jet(e, p, 1), UnknownIdentifier);
}

TEST(EvalJet, AgreesWithFiniteDifferencesOnRandomExpressions) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  const double h = 1e-5;
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string src = random_expression(rng, 5);
    const Expression e = parse_expression(src, kXyz);
    std::vector<double> p = {coord(rng), coord(rng), coord(rng)};
    const Jet j = eval_jet(e, p, 2);
    EXPECT_NEAR(j.value(), e.evaluate(std::span<const double>(p)), 1e-12 * std::max(1.0, std::fabs(j.value())));
    for (int a = 0; a < 3; ++a) {
      MultiIndex ea(3, 0);
      ea[static_cast<std::size_t>(a)] = 1;
      auto at = [&](double delta) {
        std::vector<double> q = p;
        q[static_cast<std::size_t>(a)] += delta;
        return q;
      };
      const auto qp = at(h), qm = at(-h);
      const double fd1 = (e.evaluate(std::span<const double>(qp)) - e.evaluate(std::span<const double>(qm))) / (2 * h);
      EXPECT_TRUE(close(derivative_coefficient(j, ea), fd1, 1e-6, 1e-9))
          << src << " d" << a << ": " << derivative_coefficient(j, ea) << " vs " << fd1;
      // Second derivatives: central difference of the gradient.
      const Jet jp = eval_jet(e, qp, 1), jm = eval_jet(e, qm, 1);
      for (int b = 0; b < 3; ++b) {
        MultiIndex eb(3, 0);
        eb[static_cast<std::size_t>(b)] = 1;
        MultiIndex eab = ea;
        eab[static_cast<std::size_t>(b)] += 1;
        const double fd2 = (derivative_coefficient(jp, eb) - derivative_coefficient(jm, eb)) / (2 * h);
        EXPECT_TRUE(close(derivative_coefficient(j, eab), fd2, 1e-6, 1e-9))
            << src << " d" << a << b << ": " << derivative_coefficient(j, eab) << " vs " << fd2;
      }
    }
    ++checked;
  }
  EXPECT_EQ(checked, 1000);
}

TEST(JetAlgebra, SumAndProductLaws) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string fs = random_expression(rng, 3), gs = random_expression(rng, 3);
    const std::vector<double> p = {coord(rng), coord(rng), coord(rng)};
    const Jet f = eval_jet(parse_expression(fs, kXyz), p, 3);
    const Jet g = eval_jet(parse_expression(gs, kXyz), p, 3);
    const Jet sum = eval_jet(parse_expression("(" + fs + ") + (" + gs + ")", kXyz), p, 3);
    const Jet prod = eval_jet(parse_expression("(" + fs + ") * (" + gs + ")", kXyz), p, 3);
    const Jet fsum = f + g;
    // Leibniz: d_a (fg) = f d_a g + g d_a f, compared at order 2.
    for (int a = 0; a < 3; ++a) {
      const Jet lhs = prod.partial(a);
      const Jet rhs = f * g.partial(a) + g * f.partial(a);
      for (std::size_t c = 0; c < lhs.coefficients().size(); ++c)
        EXPECT_NEAR(lhs.coefficients()[c], rhs.coefficients()[c], 1e-9 * (1 + std::fabs(rhs.coefficients()[c])));
    }
    for (std::size_t c = 0; c < sum.coefficients().size(); ++c)
      EXPECT_NEAR(sum.coefficients()[c], fsum.coefficients()[c], 1e-12 * (1 + std::fabs(fsum.coefficients()[c])));
  }
}

TEST(JetAlgebra, CompositionMatchesDirectEvaluation) {
  // exp(2*y) composed with y = x1 + x2^2 equals exp(2*(x1 + x2^2)).
  const std::vector<double> p = {0.3, -0.4};
  const Jet inner = eval_jet(parse_expression("x1 + x2^2", {"x1", "x2"}), p, 4);
  const std::vector<double> y = {inner.value()};
  const Jet outer = eval_jet(parse_expression("exp(2*y)", {"y"}), y, 4);
  const Jet composed = compose(outer, std::span<const Jet>(&inner, 1));
  const Jet direct = eval_jet(parse_expression("exp(2*(x1 + x2^2))", {"x1", "x2"}), p, 4);
  for (std::size_t c = 0; c < direct.coefficients().size(); ++c)
    EXPECT_NEAR(composed.coefficients()[c], direct.coefficients()[c], 1e-12 * (1 + std::fabs(direct.coefficients()[c])));
}
