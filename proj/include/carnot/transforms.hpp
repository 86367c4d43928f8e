#pragma once

#include "carnot/grid.hpp"
#include "carnot/group.hpp"

#include <json.hpp>

#include <optional>
#include <vector>

namespace carnot {

enum class ConvolutionMode { sup, inf };

struct ConvolutionResult {
    GridField field;
    /// Node attaining the discrete sup (inf) for each target node; ties go to the lowest index.
    std::vector<std::size_t> witnesses;
    double epsilon = 0.0;
    /// Sampled estimate of sup ‖∇²_x kernel‖ over the grid.
    double kernel_constant = 0.0;
    ConvolutionMode mode = ConvolutionMode::sup;

    /// Semiconvexity (sup) / semiconcavity (inf) constant kernel_constant / (2ε).
    double semiconvexity_constant() const { return kernel_constant / (2.0 * epsilon); }
};

/// u^ε(x) = max_y ( u(y) − kernel(x, y) / (2ε) ) over every grid node y, brute force.
/// Inf mode returns −convolve(−u, sup). If kernel_const is omitted it is estimated
/// with kernel_constant(g, dom).
ConvolutionResult convolve(const CarnotGroup& g, const GridField& u, double epsilon, ConvolutionMode mode,
                           std::optional<double> kernel_const = std::nullopt);

/// Interior nodes whose kernel distance N(x·y⁻¹) to every boundary-face node is
/// at least radius (up to 1e-12 relative rounding slack).
std::vector<bool> shrink_domain(const CarnotGroup& g, const GridDomain& dom, double radius);

struct CertResult {
    bool passed = true;
    double constant = 0.0;
    std::size_t worst_node = 0;
    double worst_eigenvalue = 0.0;
    std::size_t nodes_checked = 0;
};

/// Least eigenvalue of the centered-difference Hessian of u + C‖x‖²_E at every
/// interior node; passes when none is below −tol. A necessary condition for
/// convexity, not a proof of it.
CertResult semiconvexity_certificate(const GridField& u, double C, double tol);

/// max over sampled node pairs (x, y) of the spectral norm of ∇²_x kernel(x, y).
/// Nodes are sampled every `stride` along each axis, always including the last
/// node; stride 0 picks the smallest stride with at most 11 samples per axis.
double kernel_constant(const CarnotGroup& g, const GridDomain& dom, std::size_t stride = 0);

/// ω_u(t) = max |u(x) − u(y)| over node pairs with ‖x − y‖_E ≤ t.
double modulus_of_continuity(const GridField& u, double t);

struct ConvergenceRow {
    double epsilon = 0.0;
    double max_gap = 0.0;
    double max_witness_displacement = 0.0;
    /// u^{ε_prev} ≥ u^ε at every node (true on the first row).
    bool monotone = true;
    /// C with max displacement = C (R₀ε)^{1/r}.
    double displacement_constant = 0.0;
    /// ω_u(C (R₀ε)^{1/r}).
    double modulus_bound = 0.0;
    bool bound_holds = true;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool gaps_nonincreasing = true;
    double r0 = 0.0;
    nlohmann::json to_json() const;
};

/// epsilons must be strictly decreasing.
ConvergenceReport convergence_report(const CarnotGroup& g, const GridField& u, const std::vector<double>& epsilons,
                                     std::optional<double> kernel_const = std::nullopt);

namespace serial {
ConvolutionResult convolve(const CarnotGroup& g, const GridField& u, double epsilon, ConvolutionMode mode,
                           std::optional<double> kernel_const = std::nullopt);
std::vector<bool> shrink_domain(const CarnotGroup& g, const GridDomain& dom, double radius);
} // namespace serial

} // namespace carnot
