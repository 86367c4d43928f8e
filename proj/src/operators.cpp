#include "carnot/operators.hpp"

#include "carnot/errors.hpp"
#include "carnot/random.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace carnot {

namespace {

double spectral_norm(const Eigen::MatrixXd& M)
{
    if (M.size() == 0)
        return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

void check_c(double c)
{
    if (!(c >= 0.0) || !std::isfinite(c))
        throw InputError("operator parameter c must be a nonnegative number");
}

nlohmann::json vec_json(const Eigen::VectorXd& v)
{
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
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

// Sampled ω₂ for operators without a closed form.
NonlinearOperator::Modulus sampled_modulus(NonlinearOperator::Eval eval, int m)
{
    return [eval, m](double t, const DataRange& range) {
        if (t <= 0.0)
            return 0.0;
        Uniform rng(0x5eed);
        double best = 0.0;
        const double mscale = range.m_bound / std::max(1, m);
        for (int s = 0; s < 256; ++s) {
            const double r = rng(range.r_lo, range.r_hi);
            Eigen::VectorXd p(m), e(m);
            Eigen::MatrixXd M(m, m);
            for (int i = 0; i < m; ++i) {
                p[i] = rng(-1.0, 1.0) * range.p_bound / std::sqrt(double(m));
                e[i] = rng(-1.0, 1.0);
                for (int j = i; j < m; ++j)
                    M(i, j) = M(j, i) = rng(-mscale, mscale);
            }
            if (e.norm() == 0.0)
                continue;
            e /= e.norm();
            best = std::max(best, std::abs(eval(r, p + t * e, M) - eval(r, p, M)));
        }
        return best;
    };
}

} // namespace

NonlinearOperator::NonlinearOperator(std::string name, int m, Eval eval, DeclaredProperties declared,
                                     Modulus omega2, bool omega2_estimated)
    : name_(std::move(name)), params_(nlohmann::json::object()), m_(m), eval_(std::move(eval)),
      declared_(declared), omega2_(std::move(omega2)), omega2_estimated_(omega2_estimated)
{
    if (m_ < 1)
        throw InputError("operator dimension must be at least 1");
}

double NonlinearOperator::operator()(double r, const Eigen::VectorXd& p, const Eigen::MatrixXd& M) const
{
    if (p.size() != m_ || M.rows() != m_ || M.cols() != m_)
        throw InputError("operator '" + name_ + "' expects m = " + std::to_string(m_));
    return eval_(r, p, M);
}

nlohmann::json NonlinearOperator::to_json() const
{
    nlohmann::json j = params_;
    j["op"] = name_;
    j["declared"] = {{"degenerate_subelliptic", declared_.degenerate_subelliptic},
                     {"uniformly_subelliptic", declared_.uniformly_subelliptic},
                     {"nonincreasing", declared_.nonincreasing},
                     {"decreasing", declared_.decreasing}};
    if (alpha1)
        j["alpha1"] = *alpha1;
    if (alpha2)
        j["alpha2"] = *alpha2;
    if (alpha3)
        j["alpha3"] = *alpha3;
    j["omega2_estimated"] = omega2_estimated_;
    return j;
}

NonlinearOperator trace_minus_u(int m, double c)
{
    check_c(c);
    DeclaredProperties d{true, true, true, c > 0.0};
    NonlinearOperator F("trace_minus_u", m,
                        [c](double r, const Eigen::VectorXd&, const Eigen::MatrixXd& M) { return M.trace() - c * r; },
                        d, [](double, const DataRange&) { return 0.0; });
    F.alpha1 = 1.0;
    F.alpha2 = 0.0;
    if (c > 0.0)
        F.alpha3 = c;
    return F;
}

NonlinearOperator infinity_sublap(int m, double c)
{
    check_c(c);
    DeclaredProperties d{true, false, true, c > 0.0};
    // |⟨Mp',p'⟩ − ⟨Mp,p⟩| ≤ ‖M‖ t (2|p| + t) for |p' − p| ≤ t.
    NonlinearOperator F(
        "infinity_sublap", m,
        [c](double r, const Eigen::VectorXd& p, const Eigen::MatrixXd& M) { return p.dot(M * p) - c * r; }, d,
        [](double t, const DataRange& range) { return range.m_bound * t * (2.0 * range.p_bound + t); });
    if (c > 0.0)
        F.alpha3 = c;
    return F;
}

NonlinearOperator pucci_minus_u(int m, double lambda, double Lambda, double c)
{
    check_c(c);
    if (!(lambda > 0.0) || !(Lambda >= lambda))
        throw InputError("pucci_minus_u needs 0 < lambda <= Lambda");
    DeclaredProperties d{true, true, true, c > 0.0};
    NonlinearOperator F(
        "pucci_minus_u", m,
        [lambda, Lambda, c](double r, const Eigen::VectorXd&, const Eigen::MatrixXd& M) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
            double pos = 0.0, neg = 0.0;
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                const double e = es.eigenvalues()[i];
                (e > 0.0 ? pos : neg) += e;
            }
            return lambda * pos + Lambda * neg - c * r;
        },
        d, [](double, const DataRange&) { return 0.0; });
    F.alpha1 = lambda;
    F.alpha2 = 0.0;
    if (c > 0.0)
        F.alpha3 = c;
    return F;
}

NonlinearOperator neg_trace_minus_u(int m, double c)
{
    check_c(c);
    return NonlinearOperator(
        "neg_trace_minus_u", m,
        [c](double r, const Eigen::VectorXd&, const Eigen::MatrixXd& M) { return -M.trace() - c * r; }, {},
        [](double, const DataRange&) { return 0.0; });
}

VariableResolver operator_variables(int m)
{
    return [m](const std::string& name) -> std::optional<int> {
        if (name == "r")
            return 0;
        auto digits = [](const std::string& s) {
            return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
        };
        if (name.size() >= 2 && name[0] == 'p' && digits(name.substr(1))) {
            const int l = std::stoi(name.substr(1));
            if (l >= 1 && l <= m)
                return l;
            return std::nullopt;
        }
        // Mij with single-digit indices for m ≤ 9.
        if (name.size() == 3 && name[0] == 'M' && digits(name.substr(1))) {
            const int i = name[1] - '1', j = name[2] - '1';
            if (i >= 0 && i < m && j >= 0 && j < m)
                return 1 + m + i * m + j;
        }
        return std::nullopt;
    };
}

NonlinearOperator expr_operator(const std::string& text, int m, DeclaredProperties declared)
{
    const Expr e = parse(text, operator_variables(m));
    const int nvars = 1 + m + m * m;
    NonlinearOperator::Eval eval = [e, m, nvars](double r, const Eigen::VectorXd& p, const Eigen::MatrixXd& M) {
        std::vector<double> vars(nvars);
        vars[0] = r;
        for (int l = 0; l < m; ++l)
            vars[1 + l] = p[l];
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                vars[1 + m + i * m + j] = 0.5 * (M(i, j) + M(j, i));
        return evaluate(e, vars);
    };
    NonlinearOperator F("expr", m, eval, declared, sampled_modulus(eval, m), true);
    return F;
}

NonlinearOperator NonlinearOperator::from_json(const nlohmann::json& j, int m)
{
    if (!j.is_object() || !j.contains("op") || !j["op"].is_string())
        throw InputError("operator must be an object with an \"op\" name");
    const std::string op = j["op"];
    auto num = [&](const char* key, double fallback) {
        if (!j.contains(key))
            return fallback;
        if (!j[key].is_number())
            throw InputError(std::string("operator parameter '") + key + "' must be a number");
        return j[key].get<double>();
    };
    nlohmann::json params = j;
    params.erase("op");
    std::optional<NonlinearOperator> F;
    if (op == "trace_minus_u") {
        F = trace_minus_u(m, num("c", 1.0));
    } else if (op == "infinity_sublap") {
        F = infinity_sublap(m, num("c", 1.0));
    } else if (op == "pucci_minus_u") {
        F = pucci_minus_u(m, num("lambda", 1.0), num("Lambda", 2.0), num("c", 1.0));
    } else if (op == "neg_trace_minus_u") {
        F = neg_trace_minus_u(m, num("c", 0.0));
    } else if (op == "expr") {
        if (!j.contains("expr") || !j["expr"].is_string())
            throw InputError("expr operator needs an \"expr\" string");
        DeclaredProperties d;
        if (j.contains("declared")) {
            const auto& dj = j["declared"];
            d.degenerate_subelliptic = dj.value("degenerate_subelliptic", false);
            d.uniformly_subelliptic = dj.value("uniformly_subelliptic", false);
            d.nonincreasing = dj.value("nonincreasing", false);
            d.decreasing = dj.value("decreasing", false);
        }
        F = expr_operator(j["expr"], m, d);
        for (const char* key : {"alpha1", "alpha2", "alpha3"})
            if (j.contains(key)) {
                const double a = num(key, 0.0);
                if (!(a >= 0.0))
                    throw InputError(std::string(key) + " must be nonnegative");
                (key[5] == '1' ? F->alpha1 : key[5] == '2' ? F->alpha2 : F->alpha3) = a;
            }
    } else {
        throw InputError("unknown operator '" + op + "'");
    }
    F->params_ = params;
    return *F;
}

double evaluate_operator(const NonlinearOperator& F, const HorizontalJet& jet)
{
    return F(jet.value, jet.gradient, jet.hessian);
}

// ---------------------------------------------------------------------------
// structure checks

namespace {

struct Probe {
    double r, s;
    Eigen::VectorXd p, q;
    Eigen::MatrixXd lower, upper; // lower ⪯ upper
};

nlohmann::json probe_json(const Probe& t)
{
    return {{"r", t.r}, {"s", t.s}, {"p", vec_json(t.p)}, {"q", vec_json(t.q)},
            {"lower", mat_json(t.lower)}, {"upper", mat_json(t.upper)}};
}

std::vector<Probe> planted_probes(int m)
{
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
    const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(m, m);
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd e1 = z;
    e1[0] = 1.0;
    Eigen::MatrixXd E11 = Z;
    E11(0, 0) = 1.0;
    return {
        {0.0, -1.0, z, z, Z, I},
        {1.0, 0.0, e1, z, -I, I},
        {2.0, 1.0, Eigen::VectorXd::Ones(m), -Eigen::VectorXd::Ones(m), Z, E11},
    };
}

double slack(double a, double b) { return 1e-10 * (1.0 + std::abs(a) + std::abs(b)); }

} // namespace

StructureReport check_structure(const NonlinearOperator& F, int m, std::size_t samples, std::uint64_t seed)
{
    if (samples < 1)
        throw InputError("structure check needs at least one sample");
    if (m != F.dim())
        throw InputError("operator dimension does not match m");

    std::vector<Probe> probes = planted_probes(m);
    Uniform rng(seed);
    for (std::size_t k = 0; k < samples; ++k) {
        Probe t;
        t.r = rng(-2.0, 2.0);
        t.s = t.r - rng(0.0, 2.0);
        t.p.resize(m);
        t.q.resize(m);
        t.lower.resize(m, m);
        Eigen::MatrixXd Q(m, m);
        for (int i = 0; i < m; ++i) {
            t.p[i] = rng(-2.0, 2.0);
            t.q[i] = rng(-2.0, 2.0);
            for (int j = i; j < m; ++j)
                t.lower(i, j) = t.lower(j, i) = rng(-2.0, 2.0);
            for (int j = 0; j < m; ++j)
                Q(i, j) = rng(-1.0, 1.0);
        }
        t.upper = t.lower + Q * Q.transpose();
        probes.push_back(std::move(t));
    }

    const DeclaredProperties& d = F.declared();
    StructureReport rep;
    rep.samples = samples;
    rep.seed = seed;
    rep.degenerate_subelliptic.declared = d.degenerate_subelliptic;
    rep.uniformly_subelliptic.declared = d.uniformly_subelliptic;
    rep.nonincreasing.declared = d.nonincreasing;
    rep.decreasing.declared = d.decreasing;

    // Degenerate ellipticity and monotonicity in r: no constants, first violation is the counterexample.
    auto first_violation = [&](PropertyCheck& check, auto violated) {
        check.passed = true;
        for (const Probe& t : probes)
            if (violated(t)) {
                check.passed = false;
                check.counterexample = probe_json(t);
                return;
            }
    };
    first_violation(rep.degenerate_subelliptic, [&](const Probe& t) {
        const double a = F(t.r, t.p, t.lower), b = F(t.r, t.p, t.upper);
        return a > b + slack(a, b);
    });
    first_violation(rep.nonincreasing, [&](const Probe& t) {
        const double a = F(t.r, t.p, t.lower), b = F(t.s, t.p, t.lower);
        return a > b + slack(a, b);
    });

    // Uniform ellipticity with upper ⪰ lower.
    PropertyCheck& uni = rep.uniformly_subelliptic;
    if (d.uniformly_subelliptic && F.alpha1) {
        const double a1 = *F.alpha1, a2 = F.alpha2.value_or(0.0);
        uni.constant = a1;
        uni.constant2 = a2;
        first_violation(uni, [&](const Probe& t) {
            const double a = F(t.r, t.p, t.upper), b = F(t.r, t.q, t.lower);
            const double bound = a1 * (t.upper - t.lower).trace() - a2 * (t.p - t.q).norm();
            return a - b < bound - slack(a, b) - 1e-10 * std::abs(bound);
        });
        uni.passed = uni.passed && a1 > 1e-9;
    } else {
        uni.estimated = true;
        double a1 = std::numeric_limits<double>::infinity();
        const Probe* worst = nullptr;
        for (const Probe& t : probes) {
            const double tr = (t.upper - t.lower).trace();
            if (tr <= 1e-12)
                continue;
            const double ratio = (F(t.r, t.p, t.upper) - F(t.r, t.p, t.lower)) / tr;
            if (ratio < a1) {
                a1 = ratio;
                worst = &t;
            }
        }
        double a2 = 0.0;
        for (const Probe& t : probes) {
            const double dp = (t.p - t.q).norm();
            if (dp <= 1e-12)
                continue;
            const double gap = a1 * (t.upper - t.lower).trace() - (F(t.r, t.p, t.upper) - F(t.r, t.q, t.lower));
            a2 = std::max(a2, gap / dp);
        }
        uni.constant = a1;
        uni.constant2 = a2;
        uni.passed = a1 > 1e-9 && std::isfinite(a2);
        if (!uni.passed && worst)
            uni.counterexample = probe_json(*worst);
    }

    // Strict decrease in r, read as F(r,p,M) − F(s,p,M) ≤ −α₃(r − s) for r ≥ s.
    PropertyCheck& dec = rep.decreasing;
    if (d.decreasing && F.alpha3) {
        const double a3 = *F.alpha3;
        dec.constant = a3;
        first_violation(dec, [&](const Probe& t) {
            const double a = F(t.r, t.p, t.lower), b = F(t.s, t.p, t.lower);
            return a - b > -a3 * (t.r - t.s) + slack(a, b);
        });
        dec.passed = dec.passed && a3 > 1e-9;
    } else {
        dec.estimated = true;
        double a3 = std::numeric_limits<double>::infinity();
        const Probe* worst = nullptr;
        for (const Probe& t : probes) {
            if (t.r - t.s <= 1e-12)
                continue;
            const double ratio = (F(t.s, t.p, t.lower) - F(t.r, t.p, t.lower)) / (t.r - t.s);
            if (ratio < a3) {
                a3 = ratio;
                worst = &t;
            }
        }
        dec.constant = a3;
        dec.passed = a3 > 1e-9;
        if (!dec.passed && worst)
            dec.counterexample = probe_json(*worst);
    }
    return rep;
}

nlohmann::json StructureReport::to_json() const
{
    auto check_json = [](const PropertyCheck& c) {
        nlohmann::json j = {{"declared", c.declared}, {"passed", c.passed}, {"estimated", c.estimated}};
        j["constant"] = c.constant ? nlohmann::json(*c.constant) : nlohmann::json(nullptr);
        if (c.constant2)
            j["constant2"] = *c.constant2;
        j["counterexample"] = c.counterexample ? *c.counterexample : nlohmann::json(nullptr);
        return j;
    };
    return {{"degenerate_subelliptic", check_json(degenerate_subelliptic)},
            {"uniformly_subelliptic", check_json(uniformly_subelliptic)},
            {"nonincreasing", check_json(nonincreasing)},
            {"decreasing", check_json(decreasing)},
            {"decreasing_reading", "F(r,p,M) - F(s,p,M) <= -alpha3*(r - s) for r >= s"},
            {"hypothesis_i", hypothesis_i()},
            {"hypothesis_ii", hypothesis_ii()},
            {"samples", samples},
            {"seed", seed}};
}

NonlinearOperator with_estimated_constants(const NonlinearOperator& F, const StructureReport& report)
{
    NonlinearOperator out = F;
    DeclaredProperties d = F.declared();
    d.degenerate_subelliptic = report.degenerate_subelliptic.passed;
    d.nonincreasing = report.nonincreasing.passed;
    d.uniformly_subelliptic = report.uniformly_subelliptic.passed;
    d.decreasing = report.decreasing.passed;
    if (!out.alpha1 && report.uniformly_subelliptic.passed)
        out.alpha1 = report.uniformly_subelliptic.constant;
    if (!out.alpha2 && report.uniformly_subelliptic.passed)
        out.alpha2 = report.uniformly_subelliptic.constant2;
    if (!out.alpha3 && report.decreasing.passed)
        out.alpha3 = report.decreasing.constant;
    NonlinearOperator result(out.name(), out.dim(),
                             [out](double r, const Eigen::VectorXd& p, const Eigen::MatrixXd& M) { return out(r, p, M); },
                             d, [out](double t, const DataRange& range) { return out.omega2(t, range); },
                             out.omega2_estimated());
    result.alpha1 = out.alpha1;
    result.alpha2 = out.alpha2;
    result.alpha3 = out.alpha3;
    return result;
}

// ---------------------------------------------------------------------------
// perturbation

Expr alpha_expr(double k, double c1)
{
    const Expr x1 = Expr::coordinate(0);
    return Expr::number(1.0) - call(Function::exp, {Expr::number(-k) * (x1 + Expr::number(1.0) - Expr::number(c1))}) /
                                   Expr::number(k);
}

DataRange symbolic_range(const CarnotGroup& g, const Expr& w, const GridDomain& dom)
{
    const SymbolicJet jet(w, g.dim());
    DataRange range;
    range.r_lo = std::numeric_limits<double>::infinity();
    range.r_hi = -std::numeric_limits<double>::infinity();
    for (std::size_t node = 0; node < dom.node_count(); ++node) {
        const Point x = dom.point(node);
        const HorizontalJet h =
            horizontal_jet_from_euclidean(g, x, jet.value(x.coords()), jet.gradient_at(x.coords()),
                                          jet.hessian_at(x.coords()));
        range.p_bound = std::max(range.p_bound, h.gradient.norm());
        range.m_bound = std::max(range.m_bound, spectral_norm(h.hessian));
        range.r_lo = std::min(range.r_lo, h.value);
        range.r_hi = std::max(range.r_hi, h.value);
    }
    return range;
}

DataRange discrete_range(const CarnotGroup& g, const GridField& w)
{
    const GridDomain& dom = w.domain();
    DataRange range;
    range.r_lo = std::numeric_limits<double>::infinity();
    range.r_hi = -std::numeric_limits<double>::infinity();
    for (std::size_t node = 0; node < dom.node_count(); ++node) {
        range.r_lo = std::min(range.r_lo, w[node]);
        range.r_hi = std::max(range.r_hi, w[node]);
        if (!dom.has_margin(node, 1))
            continue;
        const HorizontalJet h = discrete_horizontal_jet(g, w, node, 1);
        range.p_bound = std::max(range.p_bound, h.gradient.norm());
        range.m_bound = std::max(range.m_bound, spectral_norm(h.hessian));
    }
    return range;
}

nlohmann::json PerturbationResult::to_json() const
{
    return {{"k", k},
            {"c_delta", c_delta},
            {"c1", c1},
            {"delta", delta},
            {"case", case_used},
            {"omega2_estimated", omega2_estimated},
            {"data_range",
             {{"p_bound", range.p_bound}, {"m_bound", range.m_bound}, {"r_lo", range.r_lo}, {"r_hi", range.r_hi}}}};
}

PerturbationResult perturb_supersolution(const CarnotGroup& g, const GridField& v, double delta,
                                         const NonlinearOperator& F, const std::optional<Expr>& v_expr)
{
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw InputError("delta must be a positive finite number");
    const GridDomain& dom = v.domain();
    if (dom.dim() != g.dim())
        throw InputError("grid dimension does not match group '" + g.name() + "'");
    if (F.dim() != g.horizontal_dim())
        throw InputError("operator dimension does not match the horizontal layer");

    const DeclaredProperties& d = F.declared();
    const bool case1 = d.degenerate_subelliptic && d.decreasing && F.alpha3;
    const bool case2 = d.uniformly_subelliptic && d.nonincreasing && F.alpha1;
    if (!case1 && !case2)
        throw InputError("operator '" + F.name() +
                         "' declares neither (degenerate, decreasing) nor (uniform, nonincreasing)");

    PerturbationResult res;
    res.delta = delta;
    res.c1 = dom.axis(0).lo;
    res.omega2_estimated = F.omega2_estimated();
    res.range = v_expr && v_expr->is_smooth() ? symbolic_range(g, *v_expr, dom) : discrete_range(g, v);
    res.range.r_hi += delta;
    const double span = dom.axis(0).hi - res.c1;

    for (int doubling = 0; doubling <= 60; ++doubling) {
        const double k = std::ldexp(2.0, doubling);
        double best = -std::numeric_limits<double>::infinity();
        if (case1) {
            // α_k is increasing in x₁: its minimum and |∇_h α_k| = e^{−k(x₁+1−c₁)} maximum sit at x₁ = c₁.
            const double min_alpha = 1.0 - std::exp(-k) / k;
            const double margin = 0.5 * *F.alpha3 * delta * min_alpha - F.omega2(delta * std::exp(-k), res.range);
            if (margin > best) {
                best = margin;
                res.case_used = "degenerate_decreasing";
            }
        }
        if (case2) {
            const double margin =
                0.5 * delta * std::exp(-k * (span + 1.0)) * (*F.alpha1 * k - F.alpha2.value_or(0.0));
            if (margin > best) {
                best = margin;
                res.case_used = "uniform_nonincreasing";
            }
        }
        if (best > 0.0) {
            res.k = k;
            res.c_delta = best;
            res.alpha_field = sample(alpha_expr(k, res.c1), g, dom);
            std::vector<double> out(v.size());
            for (std::size_t i = 0; i < v.size(); ++i)
                out[i] = v[i] + delta * res.alpha_field[i];
            res.v_delta = GridField(dom, std::move(out));
            return res;
        }
    }
    throw DomainError("no admissible k within 60 doublings for operator '" + F.name() +
                      "' (check the continuity modulus in the gradient slot)");
}

GridField classical_residual(const CarnotGroup& g, const NonlinearOperator& F, const Expr& w, const GridDomain& dom)
{
    if (dom.dim() != g.dim())
        throw InputError("grid dimension does not match group '" + g.name() + "'");
    const SymbolicJet jet(w, g.dim());
    std::vector<double> out(dom.node_count());
    for (std::size_t node = 0; node < dom.node_count(); ++node) {
        const Point x = dom.point(node);
        const HorizontalJet h =
            horizontal_jet_from_euclidean(g, x, jet.value(x.coords()), jet.gradient_at(x.coords()),
                                          jet.hessian_at(x.coords()));
        out[node] = evaluate_operator(F, h);
    }
    return GridField(dom, std::move(out));
}

} // namespace carnot
