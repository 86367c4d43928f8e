#include "carnot/horizontal.hpp"

#include "carnot/errors.hpp"
#include "carnot/grid.hpp"

namespace carnot {

Eigen::MatrixXd coefficient_matrix(const CarnotGroup& g, const Point& x)
{
    g.check_conformant(x);
    const int m = g.horizontal_dim();
    const int n = g.dim();
    Eigen::MatrixXd a(m, n);
    for (int l = 0; l < m; ++l)
        for (int k = 0; k < n; ++k)
            a(l, k) = g.frame_coefficient(l, k).evaluate(x.coords());
    return a;
}

std::vector<Eigen::MatrixXd> coefficient_matrix_derivatives(const CarnotGroup& g, const Point& x)
{
    g.check_conformant(x);
    const int m = g.horizontal_dim();
    const int n = g.dim();
    std::vector<Eigen::MatrixXd> d(n, Eigen::MatrixXd(m, n));
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < m; ++l)
            for (int k = 0; k < n; ++k)
                d[j](l, k) = g.frame_coefficient_derivative(l, k, j).evaluate(x.coords());
    return d;
}

HorizontalJet horizontal_jet_from_euclidean(const CarnotGroup& g, const Point& x, double value,
                                            const Eigen::VectorXd& egrad, const Eigen::MatrixXd& ehess)
{
    const int n = g.dim();
    if (egrad.size() != n || ehess.rows() != n || ehess.cols() != n)
        throw InputError("Euclidean jet dimension does not match the group");
    const double scale = 1.0 + ehess.cwiseAbs().maxCoeff();
    if ((ehess - ehess.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InputError("Euclidean Hessian is not symmetric");

    const Eigen::MatrixXd a = coefficient_matrix(g, x);
    const auto da = coefficient_matrix_derivatives(g, x);
    const int m = g.horizontal_dim();

    // first_order(i, j) = Σ_k a_ik Σ_l ∂_k a_jl ∂_l u
    Eigen::MatrixXd first_order = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < n; ++k) {
        const Eigen::VectorXd dadk_grad = da[k] * egrad; // (Σ_l ∂_k a_jl ∂_l u)_j
        for (int i = 0; i < m; ++i)
            first_order.row(i) += a(i, k) * dadk_grad.transpose();
    }
    const Eigen::MatrixXd hess = a * ehess * a.transpose() + first_order;
    return HorizontalJet(value, a * egrad, hess);
}

void discrete_euclidean_jet(const GridField& u, std::size_t node, int h_steps, Eigen::VectorXd& grad,
                            Eigen::MatrixXd& hess)
{
    const GridDomain& dom = u.domain();
    if (h_steps < 1)
        throw InputError("h_steps must be >= 1");
    if (!dom.has_margin(node, static_cast<std::size_t>(h_steps)))
        throw BoundaryError("node " + std::to_string(node) + " lacks a " + std::to_string(h_steps) +
                            "-node margin for centered differences");
    const int n = dom.dim();
    grad.resize(n);
    hess.resize(n, n);
    const double c = u[node];
    for (int i = 0; i < n; ++i) {
        const std::size_t si = dom.stride(i) * h_steps;
        const double hi = dom.spacing(i) * h_steps;
        const double up = u[node + si];
        const double dn = u[node - si];
        grad[i] = (up - dn) / (2.0 * hi);
        hess(i, i) = (up - 2.0 * c + dn) / (hi * hi);
        for (int j = i + 1; j < n; ++j) {
            const std::size_t sj = dom.stride(j) * h_steps;
            const double hj = dom.spacing(j) * h_steps;
            const double pp = u[node + si + sj];
            const double pm = u[node + si - sj];
            const double mp = u[node - si + sj];
            const double mm = u[node - si - sj];
            hess(i, j) = hess(j, i) = (pp - pm - mp + mm) / (4.0 * hi * hj);
        }
    }
}

HorizontalJet discrete_horizontal_jet(const CarnotGroup& g, const GridField& u, std::size_t node, int h_steps)
{
    if (u.domain().dim() != g.dim())
        throw InputError("grid dimension does not match the group");
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    discrete_euclidean_jet(u, node, h_steps, grad, hess);
    return horizontal_jet_from_euclidean(g, u.domain().point(node), u[node], grad, hess);
}

} // namespace carnot
