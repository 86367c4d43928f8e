#pragma once

#include "carnot/grid.hpp"
#include "carnot/group.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace carnot {

enum class ExprKind { number, variable, negate, add, subtract, multiply, divide, power, call };

enum class Function { exp, log, sqrt, abs, min, max, sin, cos };

struct ExprNode;

/// Immutable expression tree over real literals and indexed variables.
/// Copies share structure.
class Expr {
public:
    Expr() = default;
    explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

    static Expr number(double v);
    /// Variable with flat index `index` printed as `name`.
    static Expr variable(int index, std::string name);
    /// Coordinate x{index+1}.
    static Expr coordinate(int index);

    ExprKind kind() const;
    const ExprNode& node() const { return *node_; }
    bool valid() const noexcept { return node_ != nullptr; }

    /// Canonical text; parse(to_string()) reproduces the tree.
    std::string to_string() const;

    /// Largest variable index referenced, or -1.
    int max_variable() const;
    bool depends_on(int var) const;
    /// No abs/min/max anywhere in the tree.
    bool is_smooth() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
    ExprKind kind = ExprKind::number;
    double value = 0.0;  // number
    int index = 0;       // variable index, or integer exponent for power
    std::string name;    // variable name
    Function function = Function::exp;
    std::vector<Expr> args;
};

// Builders fold constants and drop neutral elements.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, int exponent);
Expr call(Function f, std::vector<Expr> args);

/// Maps an identifier to a variable index, or nullopt if unknown.
using VariableResolver = std::function<std::optional<int>(const std::string&)>;

/// Resolves x1, x2, ... to indices 0, 1, ...
std::optional<int> coordinate_variables(const std::string& name);

/// Grammar:
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' ['-'] integer)?
///   primary := number | identifier | function '(' expr (',' expr)* ')' | '(' expr ')'
/// A minus sign applied directly to a numeric literal yields a negative literal.
Expr parse(const std::string& text, const VariableResolver& resolve = coordinate_variables);

/// Throws InputError for variables beyond vars.size(), DomainError for
/// log of a non-positive, sqrt of a negative or division by zero.
double evaluate(const Expr& e, std::span<const double> vars);

/// ∂e/∂(variable var). Throws NonsmoothError when abs/min/max depends on var.
Expr differentiate(const Expr& e, int var);

/// Replaces variable i by replacements[i].
Expr substitute(const Expr& e, const std::vector<Expr>& replacements);

/// Expression for a polynomial whose variables are x1..xk.
Expr polynomial_expr(const class Polynomial& p);

/// Value, gradient and Hessian expressions of a smooth field in n coordinates.
class SymbolicJet {
public:
    SymbolicJet(const Expr& f, int n);

    const Expr& field() const noexcept { return f_; }
    const Expr& gradient(int i) const { return grad_[i]; }
    const Expr& hessian(int i, int j) const { return hess_[i * n_ + j]; }

    double value(std::span<const double> x) const { return evaluate(f_, x); }
    Eigen::VectorXd gradient_at(std::span<const double> x) const;
    Eigen::MatrixXd hessian_at(std::span<const double> x) const;

private:
    int n_;
    Expr f_;
    std::vector<Expr> grad_;
    std::vector<Expr> hess_;
};

/// Samples e at every node of dom (node order). Variables must fit the group dimension.
GridField sample(const Expr& e, const CarnotGroup& g, const GridDomain& dom);

namespace serial {
GridField sample(const Expr& e, const CarnotGroup& g, const GridDomain& dom);
}

} // namespace carnot
