#pragma once

#include "carnot/expr.hpp"
#include "carnot/grid.hpp"
#include "carnot/group.hpp"
#include "carnot/horizontal.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace carnot {

/// Magnitudes of the jets an operator is evaluated on; feeds ω₂.
struct DataRange {
    double p_bound = 0.0; // max |p|
    double m_bound = 0.0; // max spectral norm of M
    double r_lo = 0.0;
    double r_hi = 0.0;
};

struct DeclaredProperties {
    bool degenerate_subelliptic = false;
    bool uniformly_subelliptic = false;
    bool nonincreasing = false;
    bool decreasing = false;
};

/// F(r, p, M) with its declared structure.
///
/// Sign convention: subsolutions satisfy F ≥ 0, supersolutions F ≤ 0,
/// degenerate subellipticity means F is nondecreasing in M.
class NonlinearOperator {
public:
    using Eval = std::function<double(double, const Eigen::VectorXd&, const Eigen::MatrixXd&)>;
    using Modulus = std::function<double(double, const DataRange&)>;

    NonlinearOperator(std::string name, int m, Eval eval, DeclaredProperties declared, Modulus omega2,
                      bool omega2_estimated = false);

    /// Catalog and user operators:
    ///   {"op": "trace_minus_u", "c": 1}
    ///   {"op": "infinity_sublap", "c": 1}
    ///   {"op": "pucci_minus_u", "lambda": 1, "Lambda": 2, "c": 1}
    ///   {"op": "neg_trace_minus_u", "c": 0}
    ///   {"op": "expr", "expr": "M11 + M22 - r", "declared": {...}}
    /// User expressions see r, p1..pm and Mij (1-based, M symmetric).
    static NonlinearOperator from_json(const nlohmann::json& j, int m);

    const std::string& name() const noexcept { return name_; }
    const nlohmann::json& params() const noexcept { return params_; }
    int dim() const noexcept { return m_; }
    const DeclaredProperties& declared() const noexcept { return declared_; }

    double operator()(double r, const Eigen::VectorXd& p, const Eigen::MatrixXd& M) const;
    double omega2(double t, const DataRange& range) const { return omega2_(t, range); }
    bool omega2_estimated() const noexcept { return omega2_estimated_; }

    std::optional<double> alpha1, alpha2, alpha3;

    nlohmann::json to_json() const;

private:
    std::string name_;
    nlohmann::json params_;
    int m_;
    Eval eval_;
    DeclaredProperties declared_;
    Modulus omega2_;
    bool omega2_estimated_;
};

NonlinearOperator trace_minus_u(int m, double c);
NonlinearOperator infinity_sublap(int m, double c);
NonlinearOperator pucci_minus_u(int m, double lambda, double Lambda, double c);
/// −trace(M) − c·r; fails degenerate subellipticity, kept as a negative control.
NonlinearOperator neg_trace_minus_u(int m, double c);
NonlinearOperator expr_operator(const std::string& text, int m, DeclaredProperties declared = {});

/// Variable layout for expression operators: r → 0, p_l → 1+l, M_ij → 1+m+i·m+j.
VariableResolver operator_variables(int m);

double evaluate_operator(const NonlinearOperator& F, const HorizontalJet& jet);

struct PropertyCheck {
    bool declared = false;
    bool passed = false;
    /// Verified declared constant, or the sampled estimate when none was declared.
    std::optional<double> constant;
    std::optional<double> constant2; // α₂ for the uniform check
    bool estimated = false;
    std::optional<nlohmann::json> counterexample;
};

struct StructureReport {
    PropertyCheck degenerate_subelliptic; // F(r,p,M) ≤ F(r,p,N) for M ⪯ N
    PropertyCheck uniformly_subelliptic;  // F(r,p,M) − F(r,q,N) ≥ α₁ tr(M−N) − α₂|p−q| for M ⪰ N
    PropertyCheck nonincreasing;          // F(r,p,M) ≤ F(s,p,M) for r ≥ s
    PropertyCheck decreasing;             // F(r,p,M) − F(s,p,M) ≤ −α₃(r − s) for r ≥ s
    std::size_t samples = 0;
    std::uint64_t seed = 0;

    /// Degenerate subelliptic and decreasing.
    bool hypothesis_i() const { return degenerate_subelliptic.passed && decreasing.passed; }
    /// Uniformly subelliptic and nonincreasing.
    bool hypothesis_ii() const { return uniformly_subelliptic.passed && nonincreasing.passed; }

    nlohmann::json to_json() const;
};

/// Planted probes first, then `samples` seeded random draws with N = M + QQᵀ.
StructureReport check_structure(const NonlinearOperator& F, int m, std::size_t samples, std::uint64_t seed);

/// Copy of F with missing α constants filled from passing estimates in `report`.
NonlinearOperator with_estimated_constants(const NonlinearOperator& F, const StructureReport& report);

struct PerturbationResult {
    GridField v_delta;
    GridField alpha_field;
    double k = 0.0;
    double c_delta = 0.0;
    double c1 = 0.0;
    double delta = 0.0;
    /// "degenerate_decreasing" or "uniform_nonincreasing": the case that produced c_delta.
    std::string case_used;
    DataRange range;
    bool omega2_estimated = false;

    nlohmann::json to_json() const;
};

/// α_k(x) = 1 − e^{−k(x₁+1−c₁)}/k.
Expr alpha_expr(double k, double c1);

/// v^δ = v + δ α_k with k doubled from 2 until the margin is positive.
/// The data range for ω₂ comes from the symbolic jets of v_expr when given and
/// smooth, otherwise from discrete jets at interior nodes.
PerturbationResult perturb_supersolution(const CarnotGroup& g, const GridField& v, double delta,
                                         const NonlinearOperator& F, const std::optional<Expr>& v_expr = std::nullopt);

/// F applied to the exact horizontal jet of a smooth expression at every node.
GridField classical_residual(const CarnotGroup& g, const NonlinearOperator& F, const Expr& w, const GridDomain& dom);

/// Range of the horizontal jets of a smooth expression over the grid.
DataRange symbolic_range(const CarnotGroup& g, const Expr& w, const GridDomain& dom);
/// Range of the discrete horizontal jets over interior nodes (values over all nodes).
DataRange discrete_range(const CarnotGroup& g, const GridField& w);

} // namespace carnot
