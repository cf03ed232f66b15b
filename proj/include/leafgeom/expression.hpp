#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace leafgeom {

// Arithmetic expression over a fixed list of named variables.
//
// Grammar: numbers, variables, + - * / ^, parentheses, the functions
// sin cos tan exp log sqrt sinh cosh tanh, the constant pi, and real
// spherical harmonics Y(l, m) (l <= 3, unnormalized polynomials in x, y, z).
// Y requires the variables x, y, z to be declared.
class Expression {
 public:
  Expression();  // the constant 0

  static Expression parse(std::string_view text, std::vector<std::string> variables);
  static Expression constant(double value, std::vector<std::string> variables = {});

  double operator()(std::span<const double> values) const;

  // Symbolic partial derivative. Throws ConfigError for non-differentiable nodes (Y).
  Expression derivative(std::string_view variable) const;

  bool depends_on(std::string_view variable) const;
  bool is_constant() const;
  std::string to_string() const;
  const std::vector<std::string>& variables() const { return vars_; }

  struct Node;

 private:
  Expression(std::shared_ptr<const Node> root, std::vector<std::string> vars);

  std::shared_ptr<const Node> root_;
  std::vector<std::string> vars_;
};

// Real spherical harmonic polynomial of degree l, order m (|m| <= l <= 3) at a
// point of the unit sphere. Normalization: leading coefficient one in the
// monomial convention (Y(1,0) = z, Y(1,1) = x, Y(1,-1) = y).
double real_harmonic(int l, int m, double x, double y, double z);

}  // namespace leafgeom
