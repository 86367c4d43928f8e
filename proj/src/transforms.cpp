#include "carnot/transforms.hpp"

#include "carnot/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace carnot {

namespace {

void check_inputs(const CarnotGroup& g, const GridField& u, double epsilon)
{
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InputError("epsilon must be a positive finite number");
    if (u.domain().dim() != g.dim())
        throw InputError("grid dimension does not match group '" + g.name() + "'");
}

std::vector<double> node_table(const GridDomain& dom)
{
    const std::size_t n = dom.dim();
    std::vector<double> table(dom.node_count() * n);
    for (std::size_t node = 0; node < dom.node_count(); ++node)
        dom.coordinates(node, std::span<double>(table.data() + node * n, n));
    return table;
}

// Discrete sup over all nodes for one target node. Strict comparison keeps the
// lowest index among ties.
inline void sup_at(const CarnotGroup& g, const std::vector<double>& coords, const std::vector<double>& u,
                   std::size_t n, std::size_t x, double two_eps, double& best, std::size_t& arg)
{
    const std::span<const double> xs(coords.data() + x * n, n);
    best = -std::numeric_limits<double>::infinity();
    arg = 0;
    for (std::size_t y = 0; y < u.size(); ++y) {
        const double k = g.kernel(xs, std::span<const double>(coords.data() + y * n, n));
        const double val = u[y] - k / two_eps;
        if (val > best) {
            best = val;
            arg = y;
        }
    }
}

ConvolutionResult finish(const GridField& u, std::vector<double> values, std::vector<std::size_t> witnesses,
                         double epsilon, double kc, ConvolutionMode mode)
{
    if (mode == ConvolutionMode::inf)
        for (double& v : values)
            v = -v;
    return ConvolutionResult{GridField(u.domain(), std::move(values)), std::move(witnesses), epsilon, kc, mode};
}

template <bool Parallel>
ConvolutionResult convolve_impl(const CarnotGroup& g, const GridField& u, double epsilon, ConvolutionMode mode,
                                std::optional<double> kernel_const)
{
    check_inputs(g, u, epsilon);
    const double kc = kernel_const ? *kernel_const : kernel_constant(g, u.domain());
    const GridDomain& dom = u.domain();
    const std::size_t n = dom.dim();
    const std::vector<double> coords = node_table(dom);
    std::vector<double> src = u.values();
    if (mode == ConvolutionMode::inf)
        for (double& v : src)
            v = -v;
    const double two_eps = 2.0 * epsilon;
    const long long count = static_cast<long long>(dom.node_count());
    std::vector<double> values(count);
    std::vector<std::size_t> witnesses(count);
    if constexpr (Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (long long x = 0; x < count; ++x)
            sup_at(g, coords, src, n, x, two_eps, values[x], witnesses[x]);
    } else {
        for (long long x = 0; x < count; ++x)
            sup_at(g, coords, src, n, x, two_eps, values[x], witnesses[x]);
    }
    return finish(u, std::move(values), std::move(witnesses), epsilon, kc, mode);
}

template <bool Parallel>
std::vector<bool> shrink_impl(const CarnotGroup& g, const GridDomain& dom, double radius)
{
    if (!(radius >= 0.0))
        throw InputError("shrink radius must be nonnegative");
    if (dom.dim() != g.dim())
        throw InputError("grid dimension does not match group '" + g.name() + "'");
    const std::size_t n = dom.dim();
    const std::vector<double> coords = node_table(dom);
    std::vector<std::size_t> boundary;
    for (std::size_t node = 0; node < dom.node_count(); ++node)
        if (dom.on_boundary(node))
            boundary.push_back(node);
    const double threshold = radius - 1e-12 * std::max(1.0, radius);
    const double inv_exp = 1.0 / g.gauge_exponent();
    const long long count = static_cast<long long>(dom.node_count());
    std::vector<char> keep(count, 0);
    auto test = [&](long long x) {
        if (dom.on_boundary(x))
            return;
        const std::span<const double> xs(coords.data() + x * n, n);
        for (std::size_t y : boundary) {
            const double d = std::pow(g.kernel(xs, std::span<const double>(coords.data() + y * n, n)), inv_exp);
            if (d < threshold)
                return;
        }
        keep[x] = 1;
    };
    if constexpr (Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (long long x = 0; x < count; ++x)
            test(x);
    } else {
        for (long long x = 0; x < count; ++x)
            test(x);
    }
    return std::vector<bool>(keep.begin(), keep.end());
}

double spectral_norm(const Eigen::MatrixXd& h)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace

ConvolutionResult convolve(const CarnotGroup& g, const GridField& u, double epsilon, ConvolutionMode mode,
                           std::optional<double> kernel_const)
{
    return convolve_impl<true>(g, u, epsilon, mode, kernel_const);
}

ConvolutionResult serial::convolve(const CarnotGroup& g, const GridField& u, double epsilon, ConvolutionMode mode,
                                   std::optional<double> kernel_const)
{
    return convolve_impl<false>(g, u, epsilon, mode, kernel_const);
}

std::vector<bool> shrink_domain(const CarnotGroup& g, const GridDomain& dom, double radius)
{
    return shrink_impl<true>(g, dom, radius);
}

std::vector<bool> serial::shrink_domain(const CarnotGroup& g, const GridDomain& dom, double radius)
{
    return shrink_impl<false>(g, dom, radius);
}

CertResult semiconvexity_certificate(const GridField& u, double C, double tol)
{
    if (!(C >= 0.0))
        throw InputError("semiconvexity constant must be nonnegative");
    const GridDomain& dom = u.domain();
    const int n = dom.dim();
    CertResult result;
    result.constant = C;
    result.worst_eigenvalue = std::numeric_limits<double>::infinity();
    for (std::size_t node = 0; node < dom.node_count(); ++node) {
        if (!dom.has_margin(node, 1))
            continue;
        Eigen::MatrixXd hess(n, n);
        const double c = u[node];
        for (int i = 0; i < n; ++i) {
            const std::size_t si = dom.stride(i);
            const double hi = dom.spacing(i);
            hess(i, i) = (u[node + si] - 2.0 * c + u[node - si]) / (hi * hi) + 2.0 * C;
            for (int j = i + 1; j < n; ++j) {
                const std::size_t sj = dom.stride(j);
                const double hj = dom.spacing(j);
                hess(i, j) = hess(j, i) =
                    (u[node + si + sj] - u[node + si - sj] - u[node - si + sj] + u[node - si - sj]) / (4.0 * hi * hj);
            }
        }
        double least;
        if (n == 1) {
            least = hess(0, 0);
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess, Eigen::EigenvaluesOnly);
            least = es.eigenvalues()[0];
        }
        ++result.nodes_checked;
        if (least < result.worst_eigenvalue) {
            result.worst_eigenvalue = least;
            result.worst_node = node;
        }
    }
    if (result.nodes_checked == 0)
        result.worst_eigenvalue = 0.0;
    result.passed = result.worst_eigenvalue >= -tol;
    return result;
}

double kernel_constant(const CarnotGroup& g, const GridDomain& dom, std::size_t stride)
{
    if (dom.dim() != g.dim())
        throw InputError("grid dimension does not match group '" + g.name() + "'");
    const int n = dom.dim();
    std::vector<std::vector<std::size_t>> picks(n);
    for (int k = 0; k < n; ++k) {
        const std::size_t count = dom.axis(k).nodes;
        std::size_t s = stride;
        if (s == 0)
            s = std::max<std::size_t>(1, (count - 1 + 9) / 10);
        for (std::size_t i = 0; i < count; i += s)
            picks[k].push_back(i);
        if (picks[k].back() != count - 1)
            picks[k].push_back(count - 1);
    }
    std::vector<std::vector<double>> samples;
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
        std::vector<std::size_t> multi(n);
        for (int k = 0; k < n; ++k)
            multi[k] = picks[k][idx[k]];
        samples.push_back(dom.point(dom.flat_index(multi)).vector());
        int k = n - 1;
        while (k >= 0 && ++idx[k] == picks[k].size())
            idx[k--] = 0;
        if (k < 0)
            break;
    }
    const long long count = static_cast<long long>(samples.size());
    double best = 0.0;
#pragma omp parallel for reduction(max : best) schedule(dynamic, 4)
    for (long long a = 0; a < count; ++a)
        for (const auto& y : samples)
            best = std::max(best, spectral_norm(g.kernel_hessian(samples[a], y)));
    return best;
}

double modulus_of_continuity(const GridField& u, double t)
{
    const GridDomain& dom = u.domain();
    const std::vector<double> coords = node_table(dom);
    const std::size_t n = dom.dim();
    const long long count = static_cast<long long>(dom.node_count());
    double best = 0.0;
#pragma omp parallel for reduction(max : best) schedule(dynamic, 16)
    for (long long x = 0; x < count; ++x) {
        for (long long y = x + 1; y < count; ++y) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double diff = coords[x * n + k] - coords[y * n + k];
                d2 += diff * diff;
            }
            if (std::sqrt(d2) <= t)
                best = std::max(best, std::abs(u[x] - u[y]));
        }
    }
    return best;
}

nlohmann::json ConvergenceReport::to_json() const
{
    nlohmann::json out = nlohmann::json::array();
    for (const ConvergenceRow& r : rows) {
        out.push_back({{"epsilon", r.epsilon},
                       {"max_gap", r.max_gap},
                       {"max_witness_displacement", r.max_witness_displacement},
                       {"monotone", r.monotone},
                       {"displacement_constant", r.displacement_constant},
                       {"modulus_bound", r.modulus_bound},
                       {"bound_holds", r.bound_holds}});
    }
    return {{"rows", out}, {"gaps_nonincreasing", gaps_nonincreasing}, {"r0", r0}};
}

ConvergenceReport convergence_report(const CarnotGroup& g, const GridField& u, const std::vector<double>& epsilons,
                                     std::optional<double> kernel_const)
{
    if (epsilons.empty())
        throw InputError("at least one epsilon is required");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0))
            throw InputError("epsilons must be positive");
        if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
            throw InputError("epsilons must be strictly decreasing");
    }
    const double kc = kernel_const ? *kernel_const : kernel_constant(g, u.domain());
    const GridDomain& dom = u.domain();
    ConvergenceReport report;
    report.r0 = u.max_abs();
    std::optional<GridField> previous;
    std::vector<double> xa(dom.dim()), xb(dom.dim());
    for (double eps : epsilons) {
        const ConvolutionResult conv = convolve(g, u, eps, ConvolutionMode::sup, kc);
        ConvergenceRow row;
        row.epsilon = eps;
        for (std::size_t node = 0; node < u.size(); ++node) {
            row.max_gap = std::max(row.max_gap, conv.field[node] - u[node]);
            dom.coordinates(node, xa);
            dom.coordinates(conv.witnesses[node], xb);
            double d2 = 0.0;
            for (int k = 0; k < dom.dim(); ++k)
                d2 += (xa[k] - xb[k]) * (xa[k] - xb[k]);
            row.max_witness_displacement = std::max(row.max_witness_displacement, std::sqrt(d2));
            if (previous && (*previous)[node] < conv.field[node])
                row.monotone = false;
        }
        const double scale = std::pow(report.r0 * eps, 1.0 / g.step());
        row.displacement_constant = row.max_witness_displacement > 0.0 && scale > 0.0
                                        ? row.max_witness_displacement / scale
                                        : 0.0;
        row.modulus_bound = modulus_of_continuity(u, row.max_witness_displacement);
        row.bound_holds = row.max_gap <= row.modulus_bound + 1e-12 * (1.0 + report.r0);
        if (!report.rows.empty() && row.max_gap > report.rows.back().max_gap)
            report.gaps_nonincreasing = false;
        report.rows.push_back(row);
        previous = conv.field;
    }
    return report;
}

} // namespace carnot
