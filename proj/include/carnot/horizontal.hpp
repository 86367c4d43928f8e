#pragma once

#include "carnot/group.hpp"

#include <Eigen/Dense>

namespace carnot {

class GridField;

/// (value, ∇_h u, ∇²_h u) at a point; the Hessian is symmetrized on construction.
struct HorizontalJet {
    HorizontalJet() = default;
    HorizontalJet(double value, Eigen::VectorXd gradient, const Eigen::MatrixXd& hessian)
        : value(value), gradient(std::move(gradient)), hessian(0.5 * (hessian + hessian.transpose()))
    {
    }

    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

/// a(x), the m×n matrix whose row l holds the coordinate coefficients of X_l.
Eigen::MatrixXd coefficient_matrix(const CarnotGroup& g, const Point& x);

/// ∂a/∂x_j for j = 0..n-1.
std::vector<Eigen::MatrixXd> coefficient_matrix_derivatives(const CarnotGroup& g, const Point& x);

/// Pushes a Euclidean 2-jet at x through the horizontal frame:
///   (∇_h u)_l  = Σ_k a_lk ∂_k u
///   (∇²_h u)_ij = sym( Σ_kl a_ik a_jl ∂_kl u + Σ_kl a_ik ∂_k a_jl ∂_l u ).
HorizontalJet horizontal_jet_from_euclidean(const CarnotGroup& g, const Point& x, double value,
                                            const Eigen::VectorXd& egrad, const Eigen::MatrixXd& ehess);

/// Centered second-order differences at a node with a stride of h_steps grid
/// spacings, pushed through horizontal_jet_from_euclidean.
HorizontalJet discrete_horizontal_jet(const CarnotGroup& g, const GridField& u, std::size_t node, int h_steps = 1);

/// Centered Euclidean gradient and Hessian at a node (no frame applied).
void discrete_euclidean_jet(const GridField& u, std::size_t node, int h_steps, Eigen::VectorXd& grad,
                            Eigen::MatrixXd& hess);

} // namespace carnot
