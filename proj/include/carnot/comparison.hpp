#pragma once

#include "carnot/expr.hpp"
#include "carnot/grid.hpp"
#include "carnot/group.hpp"
#include "carnot/operators.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <optional>
#include <string>

namespace carnot {

enum class Verdict { holds, hypothesis_violation, counterexample_candidate, inconclusive };

std::string to_string(Verdict v);
/// 0 holds, 1 hypothesis violation / counterexample candidate, 3 inconclusive.
int exit_code(Verdict v);

enum class SolutionKind { sub, super };

struct ClassicalReport {
    SolutionKind kind = SolutionKind::sub;
    bool passed = false;
    /// min residual over interior nodes (sub) or max (super).
    double extreme_residual = 0.0;
    std::size_t extreme_node = 0;
    Point location;

    nlohmann::json to_json() const;
};

/// Sign of F on the exact horizontal jet of w at interior nodes: sub needs
/// F ≥ −1e-9 everywhere, super F ≤ 1e-9. Throws NonsmoothError for abs/min/max.
ClassicalReport classify_classical(const CarnotGroup& g, const NonlinearOperator& F, const Expr& w,
                                   const GridDomain& dom, SolutionKind kind);

/// u^ρ(z) = ρ⁻²(u(x₀ + ρz) − u(x₀) − ρ⟨grad, z⟩) sampled on `reference`, with
/// multilinear interpolation of u. Throws BoundaryError when the window leaves the data.
GridField blow_up(const GridField& u, std::size_t x0, const Eigen::VectorXd& grad, double rho,
                  const GridDomain& reference);

struct QuadraticFit {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
    /// Root-mean-square residual of the least-squares fit.
    double residual = 0.0;
};

/// Least-squares quadratic through the (2·radius+1)ⁿ stencil centred at node.
QuadraticFit fit_quadratic(const GridField& w, std::size_t node, int radius = 2);

struct WitnessReport {
    bool found = false;
    std::size_t node = 0;
    Eigen::MatrixXd hessian;
    double fit_residual = 0.0;
    double max_eigenvalue = 0.0;
    std::size_t candidates = 0;

    nlohmann::json to_json(const GridDomain& dom) const;
};

/// Scans nodes within Euclidean `radius` of x0, nearest first, for one whose
/// quadratic fit is tight (residual ≤ 0.05·h²(1 + ‖H‖)) and whose fitted
/// Hessian has max eigenvalue ≤ tol·(1 + ‖H‖).
WitnessReport jensen_witness(const GridField& w, std::size_t x0, double radius, double tol);

struct ComparisonOptions {
    double delta = 0.1;
    double epsilon = 0.05;
    double tol = 1e-6;
    std::size_t samples = 200;
    std::uint64_t seed = 0;
    /// Expressions the fields were sampled from; enable the classical pre-checks.
    std::optional<Expr> u_expr;
    std::optional<Expr> v_expr;
};

struct ComparisonReport {
    Verdict verdict = Verdict::inconclusive;
    /// Failing step for INCONCLUSIVE, broken assumption otherwise; empty for HOLDS.
    std::string reason;
    double c_plus = 0.0;
    double delta0 = 0.0;
    std::size_t max_node = 0;
    nlohmann::json details = nlohmann::json::object();
    /// Regularized fields, kept when the pipeline reached the convolution step.
    std::optional<GridField> u_eps, v_eps, difference;

    nlohmann::json to_json() const;
};

ComparisonReport run_comparison(const CarnotGroup& g, const NonlinearOperator& F, const GridField& u,
                                const GridField& v, const ComparisonOptions& opts);

} // namespace carnot
