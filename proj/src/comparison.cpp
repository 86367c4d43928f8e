#include "carnot/comparison.hpp"

#include "carnot/errors.hpp"
#include "carnot/horizontal.hpp"
#include "carnot/transforms.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace carnot {

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::holds:
        return "HOLDS";
    case Verdict::hypothesis_violation:
        return "HYPOTHESIS_VIOLATION";
    case Verdict::counterexample_candidate:
        return "COUNTEREXAMPLE_CANDIDATE";
    case Verdict::inconclusive:
        return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

int exit_code(Verdict v)
{
    switch (v) {
    case Verdict::holds:
        return 0;
    case Verdict::hypothesis_violation:
    case Verdict::counterexample_candidate:
        return 1;
    case Verdict::inconclusive:
        return 3;
    }
    return 3;
}

namespace {

nlohmann::json coords_json(const GridDomain& dom, std::size_t node)
{
    return dom.point(node).vector();
}

nlohmann::json mat_json(const Eigen::MatrixXd& M)
{
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            row.push_back(M(i, j));
        out.push_back(row);
    }
    return out;
}

nlohmann::json vec_json(const Eigen::VectorXd& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

double max_eigenvalue(const Eigen::MatrixXd& M)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[es.eigenvalues().size() - 1];
}

double spectral_norm(const Eigen::MatrixXd& M)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace

nlohmann::json ClassicalReport::to_json() const
{
    return {{"kind", kind == SolutionKind::sub ? "sub" : "super"},
            {"passed", passed},
            {"extreme_residual", extreme_residual},
            {"node", extreme_node},
            {"location", location.vector()}};
}

ClassicalReport classify_classical(const CarnotGroup& g, const NonlinearOperator& F, const Expr& w,
                                   const GridDomain& dom, SolutionKind kind)
{
    if (!w.is_smooth())
        throw NonsmoothError("classical classification needs a smooth expression; '" + w.to_string() +
                             "' uses abs/min/max, use the grid pipeline instead");
    const GridField res = classical_residual(g, F, w, dom);
    ClassicalReport rep;
    rep.kind = kind;
    const double sign = kind == SolutionKind::sub ? 1.0 : -1.0;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t node = 0; node < dom.node_count(); ++node) {
        if (dom.on_boundary(node))
            continue;
        if (sign * res[node] < worst) {
            worst = sign * res[node];
            rep.extreme_node = node;
        }
    }
    if (!std::isfinite(worst))
        throw InputError("grid has no interior nodes");
    rep.extreme_residual = sign * worst;
    rep.passed = worst >= -1e-9;
    rep.location = dom.point(rep.extreme_node);
    return rep;
}

GridField blow_up(const GridField& u, std::size_t x0, const Eigen::VectorXd& grad, double rho,
                  const GridDomain& reference)
{
    const GridDomain& dom = u.domain();
    const int n = dom.dim();
    if (!(rho > 0.0))
        throw InputError("blow-up scale must be positive");
    if (reference.dim() != n || grad.size() != n)
        throw InputError("blow-up dimensions do not match the field");
    std::vector<double> base(n), z(n), x(n);
    dom.coordinates(x0, base);
    const double u0 = u[x0];
    std::vector<double> out(reference.node_count());
    for (std::size_t node = 0; node < reference.node_count(); ++node) {
        reference.coordinates(node, z);
        double lin = 0.0;
        for (int k = 0; k < n; ++k) {
            x[k] = base[k] + rho * z[k];
            lin += grad[k] * z[k];
        }
        out[node] = (u.interpolate(x) - u0 - rho * lin) / (rho * rho);
    }
    return GridField(reference, std::move(out));
}

QuadraticFit fit_quadratic(const GridField& w, std::size_t node, int radius)
{
    const GridDomain& dom = w.domain();
    const int n = dom.dim();
    if (radius < 1 || !dom.has_margin(node, radius))
        throw BoundaryError("quadratic fit stencil leaves the grid");
    const int params = 1 + n + n * (n + 1) / 2;
    std::size_t count = 1;
    for (int k = 0; k < n; ++k)
        count *= 2 * radius + 1;
    Eigen::MatrixXd A(count, params);
    Eigen::VectorXd b(count);
    std::vector<int> off(n, -radius);
    for (std::size_t row = 0; row < count; ++row) {
        long long target = static_cast<long long>(node);
        std::vector<double> d(n);
        for (int k = 0; k < n; ++k) {
            target += off[k] * static_cast<long long>(dom.stride(k));
            d[k] = off[k] * dom.spacing(k);
        }
        int col = 0;
        A(row, col++) = 1.0;
        for (int k = 0; k < n; ++k)
            A(row, col++) = d[k];
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                A(row, col++) = i == j ? 0.5 * d[i] * d[i] : d[i] * d[j];
        b[row] = w[static_cast<std::size_t>(target)];
        for (int k = n - 1; k >= 0; --k) {
            if (++off[k] <= radius)
                break;
            off[k] = -radius;
        }
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    QuadraticFit fit;
    fit.value = c[0];
    fit.gradient = c.segment(1, n);
    fit.hessian.resize(n, n);
    int col = 1 + n;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            fit.hessian(i, j) = fit.hessian(j, i) = c[col++];
    fit.residual = std::sqrt((A * c - b).squaredNorm() / double(count));
    return fit;
}

nlohmann::json WitnessReport::to_json(const GridDomain& dom) const
{
    nlohmann::json j = {{"found", found}, {"candidates", candidates}};
    if (found) {
        j["node"] = node;
        j["location"] = coords_json(dom, node);
        j["hessian"] = mat_json(hessian);
        j["fit_residual"] = fit_residual;
        j["max_eigenvalue"] = max_eigenvalue;
    }
    return j;
}

WitnessReport jensen_witness(const GridField& w, std::size_t x0, double radius, double tol)
{
    const GridDomain& dom = w.domain();
    const int n = dom.dim();
    constexpr int stencil = 2;
    std::vector<double> c0(n), c(n);
    dom.coordinates(x0, c0);
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t node = 0; node < dom.node_count(); ++node) {
        if (!dom.has_margin(node, stencil))
            continue;
        dom.coordinates(node, c);
        double d2 = 0.0;
        for (int k = 0; k < n; ++k)
            d2 += (c[k] - c0[k]) * (c[k] - c0[k]);
        if (std::sqrt(d2) <= radius * (1.0 + 1e-12))
            order.emplace_back(d2, node);
    }
    if (order.empty())
        throw InputError("Jensen window holds no node with a full fitting stencil");
    std::sort(order.begin(), order.end());

    const double h = dom.max_spacing();
    WitnessReport rep;
    for (const auto& [d2, node] : order) {
        ++rep.candidates;
        const QuadraticFit fit = fit_quadratic(w, node, stencil);
        const double scale = 1.0 + spectral_norm(fit.hessian);
        if (fit.residual > 0.05 * h * h * scale)
            continue;
        const double lmax = max_eigenvalue(fit.hessian);
        if (lmax > tol * scale)
            continue;
        rep.found = true;
        rep.node = node;
        rep.hessian = fit.hessian;
        rep.fit_residual = fit.residual;
        rep.max_eigenvalue = lmax;
        return rep;
    }
    return rep;
}

nlohmann::json ComparisonReport::to_json() const
{
    nlohmann::json j = details;
    j["verdict"] = to_string(verdict);
    j["reason"] = reason;
    j["c_plus"] = c_plus;
    j["delta0"] = delta0;
    j["max_node"] = max_node;
    return j;
}

namespace {

// Smallest ρ = 2^{-i} whose reference spacing still resolves the grid.
double pick_rho(double h, double ref_spacing)
{
    double rho = 1.0;
    while (0.5 * rho * ref_spacing >= h && rho > 1e-12)
        rho /= 2.0;
    return rho;
}

bool window_inside(const GridDomain& dom, std::size_t x0, double reach)
{
    for (int k = 0; k < dom.dim(); ++k) {
        const double x = dom.coordinate(x0, k);
        if (x - reach < dom.axis(k).lo - 1e-12 || x + reach > dom.axis(k).hi + 1e-12)
            return false;
    }
    return true;
}

} // namespace

ComparisonReport run_comparison(const CarnotGroup& g, const NonlinearOperator& F, const GridField& u,
                                const GridField& v, const ComparisonOptions& opts)
{
    check_same_grid(u, v);
    const GridDomain& dom = u.domain();
    if (dom.dim() != g.dim())
        throw InputError("grid dimension does not match group '" + g.name() + "'");
    if (F.dim() != g.horizontal_dim())
        throw InputError("operator dimension does not match the horizontal layer");
    if (!(opts.delta > 0.0) || !(opts.epsilon > 0.0) || !(opts.tol > 0.0))
        throw InputError("delta, epsilon and tol must be positive");

    ComparisonReport rep;
    nlohmann::json& det = rep.details;
    det["tolerances"] = {{"tol", opts.tol}, {"classical_slack", 1e-9}};
    det["operator"] = F.to_json();

    // (1) boundary excess and interior gap.
    const GridField diff = u - v;
    double c_plus = 0.0, sup_all = 0.0;
    for (std::size_t node = 0; node < dom.node_count(); ++node) {
        const double e = std::max(diff[node], 0.0);
        if (dom.on_boundary(node))
            c_plus = std::max(c_plus, e);
        if (e > sup_all) {
            sup_all = e;
            rep.max_node = node;
        }
    }
    rep.c_plus = c_plus;
    rep.delta0 = sup_all - c_plus;

    // Hypothesis diagnostics are recorded for every run.
    const StructureReport structure = check_structure(F, F.dim(), opts.samples, opts.seed);
    det["structure"] = structure.to_json();
    std::optional<ClassicalReport> sub, super;
    auto classify = [&](const std::optional<Expr>& e, SolutionKind kind, std::optional<ClassicalReport>& out,
                        const char* key) {
        if (!e || !e->is_smooth()) {
            det["classical"][key] = e ? "skipped: nonsmooth expression" : "skipped: no expression";
            return;
        }
        out = classify_classical(g, F, *e, dom, kind);
        det["classical"][key] = out->to_json();
    };
    classify(opts.u_expr, SolutionKind::sub, sub, "u");
    classify(opts.v_expr, SolutionKind::super, super, "v");

    if (rep.delta0 <= opts.tol) {
        rep.verdict = Verdict::holds;
        return rep;
    }

    // (2) structural hypotheses.
    if (!structure.hypothesis_i() && !structure.hypothesis_ii()) {
        rep.verdict = Verdict::hypothesis_violation;
        const PropertyCheck* failing = nullptr;
        std::string name;
        for (auto [check, label] : {std::pair{&structure.degenerate_subelliptic, "degenerate_subelliptic"},
                                    {&structure.uniformly_subelliptic, "uniformly_subelliptic"},
                                    {&structure.nonincreasing, "nonincreasing"},
                                    {&structure.decreasing, "decreasing"}})
            if (!check->passed && !failing) {
                failing = check;
                name = label;
            }
        rep.reason = "operator structure: " + name;
        det["offending"] = {{"property", name},
                            {"tuple", failing && failing->counterexample ? *failing->counterexample
                                                                          : nlohmann::json(nullptr)}};
        return rep;
    }
    for (auto [report, label] : {std::pair{&sub, "subsolution"}, {&super, "supersolution"}})
        if (*report && !(*report)->passed) {
            rep.verdict = Verdict::hypothesis_violation;
            rep.reason = std::string("classical ") + label;
            det["offending"] = {{"node", (*report)->extreme_node},
                                {"location", (*report)->location.vector()},
                                {"residual", (*report)->extreme_residual}};
            return rep;
        }

    const NonlinearOperator Fe = with_estimated_constants(F, structure);
    const double delta = std::min(opts.delta, rep.delta0 / 8.0);
    const double epsilon = std::min(opts.epsilon, delta / 2.0);
    det["delta"] = delta;
    det["epsilon"] = epsilon;

    // (3) shift and perturb the supersolution.
    const GridField v_shift = v + c_plus;
    std::optional<Expr> v_expr;
    if (opts.v_expr)
        v_expr = *opts.v_expr + Expr::number(c_plus);
    const PerturbationResult pert = perturb_supersolution(g, v_shift, delta, Fe, v_expr);
    det["perturbation"] = pert.to_json();

    // (4) regularize.
    const double r0 = std::max(u.max_abs(), pert.v_delta.max_abs());
    const double kc = kernel_constant(g, dom);
    const ConvolutionResult ue = convolve(g, u, epsilon, ConvolutionMode::sup, kc);
    const ConvolutionResult ve = convolve(g, pert.v_delta, epsilon, ConvolutionMode::inf, kc);
    const std::vector<bool> shrunk = shrink_domain(g, dom, 2.0 * r0 * epsilon);
    det["r0"] = r0;
    det["kernel_constant"] = kc;
    det["shrink_radius"] = 2.0 * r0 * epsilon;

    // (5) interior max of the regularized difference.
    const GridField w = ue.field - ve.field;
    rep.u_eps = ue.field;
    rep.v_eps = ve.field;
    rep.difference = w;
    std::optional<std::size_t> x0;
    for (std::size_t node = 0; node < dom.node_count(); ++node)
        if (shrunk[node] && dom.has_margin(node, 2) && (!x0 || w[node] > w[*x0]))
            x0 = node;
    if (!x0)
        throw InputError("shrunken domain is empty for epsilon = " + std::to_string(epsilon) +
                         "; use a smaller epsilon or a finer grid");
    det["x0"] = {{"node", *x0}, {"location", coords_json(dom, *x0)}, {"value", w[*x0]}};
    auto inconclusive = [&](const std::string& step) {
        rep.verdict = Verdict::inconclusive;
        rep.reason = step;
        return rep;
    };
    if (!(w[*x0] > 0.0))
        return inconclusive("max_localization");

    Eigen::VectorXd gu, gv, gw;
    Eigen::MatrixXd hu, hv, hw;
    discrete_euclidean_jet(ue.field, *x0, 1, gu, hu);
    discrete_euclidean_jet(ve.field, *x0, 1, gv, hv);
    discrete_euclidean_jet(w, *x0, 1, gw, hw);
    const double gap = (gu - gv).cwiseAbs().maxCoeff();
    const double lipschitz = std::max(gu.cwiseAbs().maxCoeff(), gv.cwiseAbs().maxCoeff());
    const double gap_tol = opts.tol * (1.0 + lipschitz) + dom.max_spacing() * hw.cwiseAbs().maxCoeff();
    det["gradient_gap"] = gap;
    det["gradient_tolerance"] = gap_tol;
    if (gap > gap_tol)
        return inconclusive("gradient_agreement");

    const double C = 2.0 * ue.semiconvexity_constant();
    const CertResult cert = semiconvexity_certificate(w, C, 1e-8 * (1.0 + C));
    det["certificate"] = {{"passed", cert.passed},
                          {"constant", cert.constant},
                          {"worst_node", cert.worst_node},
                          {"worst_eigenvalue", cert.worst_eigenvalue}};
    if (!cert.passed)
        return inconclusive("semiconvexity");

    // (6) blow-up and Jensen witness.
    const GridDomain reference = GridDomain::cube(dom.dim(), -2.0, 2.0, 9);
    const double rho = pick_rho(dom.max_spacing(), reference.spacing(0));
    det["rho"] = rho;
    if (!window_inside(dom, *x0, 2.0 * rho))
        return inconclusive("blow_up");
    const GridField ur = blow_up(ue.field, *x0, gu, rho, reference);
    const GridField vr = blow_up(ve.field, *x0, gv, rho, reference);
    const std::size_t centre = reference.node_count() / 2;
    const WitnessReport wit = jensen_witness(ur - vr, centre, 1.0, opts.tol);
    det["jensen_witness"] = wit.to_json(reference);
    if (!wit.found)
        return inconclusive("jensen_witness");

    const Point px0 = dom.point(*x0);
    const QuadraticFit fu = fit_quadratic(ur, wit.node);
    const QuadraticFit fv = fit_quadratic(vr, wit.node);
    const HorizontalJet ju = horizontal_jet_from_euclidean(g, px0, ue.field[*x0], gu, fu.hessian);
    const HorizontalJet jv = horizontal_jet_from_euclidean(g, px0, ve.field[*x0], gv, fv.hessian);
    const double Fu = evaluate_operator(Fe, ju);
    const double Fv = evaluate_operator(Fe, jv);
    const double lplus = std::max(0.0, max_eigenvalue(ju.hessian - jv.hessian));
    const Eigen::MatrixXd lifted =
        jv.hessian + lplus * Eigen::MatrixXd::Identity(jv.hessian.rows(), jv.hessian.cols());
    const DataRange range = pert.range;
    const double slack = opts.tol * (1.0 + std::abs(Fu) + std::abs(Fv));
    const double mono_slack = Fe.omega2((ju.gradient - jv.gradient).norm(), range) +
                              (Fe(jv.value, jv.gradient, lifted) - Fv) + slack;
    const bool sub_link = Fu >= -slack;
    const bool super_link = Fv <= -pert.c_delta + slack;
    const bool mono_link = Fu <= Fv + mono_slack;
    det["frozen"] = {{"M1", mat_json(ju.hessian)},
                     {"M2", mat_json(jv.hessian)},
                     {"p1", vec_json(ju.gradient)},
                     {"p2", vec_json(jv.gradient)},
                     {"max_eigenvalue_M1_minus_M2", max_eigenvalue(ju.hessian - jv.hessian)}};
    det["residuals"] = {{"F_u", Fu}, {"F_v", Fv}, {"c_delta", pert.c_delta}, {"slack", slack},
                        {"monotone_slack", mono_slack}};
    det["chain"] = {{"subsolution", sub_link}, {"supersolution", super_link}, {"monotonicity", mono_link}};

    if (!mono_link) {
        rep.verdict = Verdict::hypothesis_violation;
        rep.reason = "monotonicity at the witness";
        return rep;
    }
    if (!sub_link || !super_link) {
        rep.verdict = Verdict::counterexample_candidate;
        rep.reason = !sub_link ? "subsolution" : "supersolution";
        return rep;
    }
    return inconclusive("contradiction_chain");
}

} // namespace carnot
