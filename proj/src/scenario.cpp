#include "carnot/scenario.hpp"

#include "carnot/comparison.hpp"
#include "carnot/errors.hpp"
#include "carnot/expr.hpp"
#include "carnot/operators.hpp"
#include "carnot/random.hpp"
#include "carnot/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace carnot {

namespace {

double positive(const nlohmann::json& j, const char* key, double fallback)
{
    if (!j.contains(key))
        return fallback;
    if (!j[key].is_number())
        throw InputError(std::string("'") + key + "' must be a number");
    const double x = j[key].get<double>();
    if (!(x > 0.0) || !std::isfinite(x))
        throw InputError(std::string("'") + key + "' must be positive");
    return x;
}

Expr parse_field(const std::string& text, const CarnotGroup& g, const char* key)
{
    const Expr e = parse(text);
    if (e.max_variable() >= g.dim())
        throw InputError(std::string("field '") + key + "' uses a coordinate beyond x" + std::to_string(g.dim()));
    return e;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

double vec_err(const Point& a, const Point& b)
{
    double diff = 0.0, scale = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return diff / scale;
}

} // namespace

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw InputError("scenario config must be a JSON object");
    static const std::set<std::string> known{"group", "domain", "operator", "u", "v", "delta", "epsilon",
                                             "epsilons", "mode", "tol", "seed", "samples", "outputs"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key))
            throw InputError("unknown config key '" + key + "'");

    ScenarioConfig cfg;
    cfg.raw = j;
    if (!j.contains("group"))
        throw InputError("config needs a 'group'");
    cfg.group = CarnotGroup::from_json(j["group"]);
    if (j.contains("domain")) {
        cfg.domain = GridDomain::from_json(j["domain"]);
        if (cfg.domain->dim() != cfg.group.dim())
            throw InputError("domain has " + std::to_string(cfg.domain->dim()) + " axes but the group has dimension " +
                             std::to_string(cfg.group.dim()));
    }
    if (j.contains("operator"))
        cfg.op = j["operator"];
    for (auto [key, slot] : {std::pair{"u", &cfg.u}, {"v", &cfg.v}})
        if (j.contains(key)) {
            if (!j[key].is_string())
                throw InputError(std::string("'") + key + "' must be an expression string");
            *slot = j[key].get<std::string>();
            parse_field(**slot, cfg.group, key);
        }
    cfg.delta = positive(j, "delta", cfg.delta);
    cfg.epsilon = positive(j, "epsilon", cfg.epsilon);
    cfg.tol = positive(j, "tol", cfg.tol);
    if (j.contains("epsilons")) {
        if (!j["epsilons"].is_array() || j["epsilons"].empty())
            throw InputError("'epsilons' must be a nonempty array");
        for (const auto& e : j["epsilons"]) {
            if (!e.is_number() || !(e.get<double>() > 0.0))
                throw InputError("every epsilon must be a positive number");
            cfg.epsilons.push_back(e.get<double>());
        }
    }
    if (j.contains("mode")) {
        cfg.mode = j["mode"].get<std::string>();
        if (cfg.mode != "sup" && cfg.mode != "inf")
            throw InputError("'mode' must be \"sup\" or \"inf\"");
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
            throw InputError("'seed' must be a nonnegative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("samples")) {
        if (!j["samples"].is_number_integer() || j["samples"].get<long long>() <= 0)
            throw InputError("'samples' must be a positive integer");
        cfg.samples = j["samples"].get<std::size_t>();
    }
    if (j.contains("outputs")) {
        const auto& o = j["outputs"];
        cfg.out_dir = o.value("dir", std::string());
        if (o.contains("formats")) {
            cfg.formats = o["formats"].get<std::vector<std::string>>();
            for (const auto& f : cfg.formats)
                if (f != "json" && f != "csv")
                    throw InputError("unknown output format '" + f + "'");
        }
    }
    return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("config '" + path + "': " + e.what());
    }
    return from_json(j);
}

const GridDomain& ScenarioConfig::require_domain() const
{
    if (!domain)
        throw InputError("config needs a 'domain'");
    return *domain;
}

const std::string& ScenarioConfig::require_field(const std::optional<std::string>& f, const char* key) const
{
    if (!f)
        throw InputError(std::string("config needs a '") + key + "' expression");
    return *f;
}

bool ScenarioConfig::wants(const std::string& format) const
{
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

std::string dump_report(const nlohmann::json& report) { return report.dump(2) + "\n"; }

void write_artifacts(const CommandResult& result, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    for (const auto& [name, text] : result.artifacts) {
        const auto path = std::filesystem::path(dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw InputError("cannot write '" + path.string() + "'");
        out << text;
    }
}

// ---------------------------------------------------------------------------

CommandResult cmd_group_check(const CarnotGroup& g, std::size_t samples, std::uint64_t seed)
{
    constexpr double threshold = 1e-9;
    Uniform rng(seed);
    const int n = g.dim();
    auto draw = [&] {
        Point p(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            p[i] = rng(-1.0, 1.0);
        return p;
    };
    std::map<std::string, double> err{{"associativity", 0.0},     {"inverse", 0.0},
                                      {"double_inverse", 0.0},    {"left_invariance", 0.0},
                                      {"homogeneity", 0.0},       {"product_table", 0.0},
                                      {"kernel_gauge_power", 0.0}, {"dilation_composition", 0.0}};
    auto bump = [&](const char* key, double e) { err[key] = std::max(err[key], e); };
    const Point id = g.identity();
    for (std::size_t s = 0; s < samples; ++s) {
        const Point p = draw(), q = draw(), w = draw();
        bump("associativity", vec_err(g.multiply(g.multiply(p, q), w), g.multiply(p, g.multiply(q, w))));
        bump("inverse", std::max(vec_err(g.multiply(p, g.inverse(p)), id), vec_err(g.multiply(g.inverse(p), p), id)));
        bump("double_inverse", vec_err(g.inverse(g.inverse(p)), p));
        bump("left_invariance", rel_err(g.distance(g.multiply(w, p), g.multiply(w, q)), g.distance(p, q)));
        for (double lambda : {0.5, 2.0, 10.0})
            bump("homogeneity", rel_err(g.distance(g.dilate(lambda, p), g.dilate(lambda, q)), lambda * g.distance(p, q)));
        bump("dilation_composition", vec_err(g.dilate(2.0, g.dilate(3.0, p)), g.dilate(6.0, p)));
        bump("product_table", vec_err(g.multiply_by_table(p, q), g.multiply(p, q)));
        bump("kernel_gauge_power",
             rel_err(g.kernel(p.coords(), q.coords()), g.gauge_power(g.multiply(p, g.inverse(q)))));
    }
    CommandResult res;
    bool ok = true;
    nlohmann::json props = nlohmann::json::object();
    for (const auto& [key, e] : err) {
        props[key] = {{"max_error", e}, {"passed", e <= threshold}};
        ok = ok && e <= threshold;
    }
    res.report = {{"command", "group-check"}, {"group", g.to_json()}, {"samples", samples}, {"seed", seed},
                  {"threshold", threshold},   {"properties", props}, {"passed", ok}};
    res.exit_code = ok ? 0 : 1;
    return res;
}

CommandResult cmd_convolve(const ScenarioConfig& cfg)
{
    const GridDomain& dom = cfg.require_domain();
    const Expr ue = parse_field(cfg.require_field(cfg.u, "u"), cfg.group, "u");
    const GridField u = sample(ue, cfg.group, dom);
    const std::vector<double> eps = cfg.epsilons.empty() ? std::vector<double>{cfg.epsilon} : cfg.epsilons;
    const bool sup = cfg.mode == "sup";
    const double kc = kernel_constant(cfg.group, dom);

    // The inf-convolution of u is −(sup-convolution of −u): run the diagnostics on −u.
    const GridField base = sup ? u : -u;
    const ConvergenceReport conv = convergence_report(cfg.group, base, eps, kc);
    CommandResult res;
    bool ok = conv.gaps_nonincreasing;
    nlohmann::json certs = nlohmann::json::array();
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const ConvolutionResult c =
            convolve(cfg.group, u, eps[i], sup ? ConvolutionMode::sup : ConvolutionMode::inf, kc);
        const double C = c.semiconvexity_constant();
        const CertResult cert = semiconvexity_certificate(sup ? c.field : -c.field, C, 1e-8 * (1.0 + C));
        certs.push_back({{"epsilon", eps[i]},
                         {"constant", C},
                         {"passed", cert.passed},
                         {"worst_node", cert.worst_node},
                         {"worst_eigenvalue", cert.worst_eigenvalue}});
        ok = ok && cert.passed && conv.rows[i].monotone && conv.rows[i].bound_holds;
        if (cfg.wants("csv"))
            res.artifacts["field_" + std::to_string(i) + ".csv"] = field_csv(c.field, c.witnesses);
    }
    res.report = {{"command", "convolve"},   {"group", cfg.group.to_json()}, {"domain", dom.to_json()},
                  {"u", ue.to_string()},     {"mode", cfg.mode},              {"epsilons", eps},
                  {"kernel_constant", kc},   {"convergence", conv.to_json()}, {"semiconvexity", certs},
                  {"passed", ok}};
    res.exit_code = ok ? 0 : 1;
    return res;
}

CommandResult cmd_perturb(const ScenarioConfig& cfg)
{
    const GridDomain& dom = cfg.require_domain();
    if (!cfg.op)
        throw InputError("config needs an 'operator'");
    const NonlinearOperator F = NonlinearOperator::from_json(*cfg.op, cfg.group.horizontal_dim());
    const Expr ve = parse_field(cfg.require_field(cfg.v, "v"), cfg.group, "v");
    const GridField v = sample(ve, cfg.group, dom);
    const PerturbationResult pert = perturb_supersolution(cfg.group, v, cfg.delta, F, ve);

    bool bounds = true;
    for (std::size_t i = 0; i < v.size(); ++i)
        bounds = bounds && v[i] <= pert.v_delta[i] && pert.v_delta[i] <= v[i] + cfg.delta;
    nlohmann::json report = {{"command", "perturb"},        {"group", cfg.group.to_json()},
                             {"domain", dom.to_json()},     {"operator", F.to_json()},
                             {"v", ve.to_string()},         {"perturbation", pert.to_json()},
                             {"bounds_hold", bounds}};
    bool ok = bounds && pert.c_delta > 0.0;
    if (ve.is_smooth()) {
        const Expr vd = ve + Expr::number(cfg.delta) * alpha_expr(pert.k, pert.c1);
        const GridField before = classical_residual(cfg.group, F, ve, dom);
        const GridField after = classical_residual(cfg.group, F, vd, dom);
        double worst = -std::numeric_limits<double>::infinity(), worst_drop = worst;
        for (std::size_t i = 0; i < after.size(); ++i) {
            worst = std::max(worst, after[i]);
            worst_drop = std::max(worst_drop, after[i] - before[i]);
        }
        report["residual"] = {{"max_residual", worst},
                              {"max_residual_change", worst_drop},
                              {"strict", worst <= -pert.c_delta + 1e-9},
                              {"drop_at_least_c_delta", worst_drop <= -pert.c_delta + 1e-9}};
        ok = ok && worst_drop <= -pert.c_delta + 1e-9;
    } else {
        report["residual"] = "skipped: nonsmooth expression";
    }
    report["passed"] = ok;
    CommandResult res;
    res.report = report;
    if (cfg.wants("csv")) {
        res.artifacts["v_delta.csv"] = field_csv(pert.v_delta);
        res.artifacts["alpha.csv"] = field_csv(pert.alpha_field);
    }
    res.exit_code = ok ? 0 : 1;
    return res;
}

CommandResult cmd_structure_check(const ScenarioConfig& cfg)
{
    if (!cfg.op)
        throw InputError("config needs an 'operator'");
    const int m = cfg.group.horizontal_dim();
    const NonlinearOperator F = NonlinearOperator::from_json(*cfg.op, m);
    const StructureReport rep = check_structure(F, m, cfg.samples, cfg.seed);
    CommandResult res;
    res.report = {{"command", "structure-check"}, {"operator", F.to_json()}, {"m", m}, {"structure", rep.to_json()}};
    res.exit_code = rep.hypothesis_i() || rep.hypothesis_ii() ? 0 : 1;
    return res;
}

CommandResult cmd_compare(const ScenarioConfig& cfg)
{
    const GridDomain& dom = cfg.require_domain();
    if (!cfg.op)
        throw InputError("config needs an 'operator'");
    const NonlinearOperator F = NonlinearOperator::from_json(*cfg.op, cfg.group.horizontal_dim());
    ComparisonOptions opts;
    opts.delta = cfg.delta;
    opts.epsilon = cfg.epsilon;
    opts.tol = cfg.tol;
    opts.seed = cfg.seed;
    opts.samples = cfg.samples;
    opts.u_expr = parse_field(cfg.require_field(cfg.u, "u"), cfg.group, "u");
    opts.v_expr = parse_field(cfg.require_field(cfg.v, "v"), cfg.group, "v");
    const GridField u = sample(*opts.u_expr, cfg.group, dom);
    const GridField v = sample(*opts.v_expr, cfg.group, dom);
    const ComparisonReport rep = run_comparison(cfg.group, F, u, v, opts);

    CommandResult res;
    res.report = rep.to_json();
    res.report["command"] = "compare";
    res.report["group"] = cfg.group.to_json();
    res.report["domain"] = dom.to_json();
    res.report["u"] = opts.u_expr->to_string();
    res.report["v"] = opts.v_expr->to_string();
    res.report["grid_spacing"] = dom.max_spacing();
    if (cfg.wants("csv")) {
        if (rep.u_eps)
            res.artifacts["u_eps.csv"] = field_csv(*rep.u_eps);
        if (rep.v_eps)
            res.artifacts["v_delta_eps.csv"] = field_csv(*rep.v_eps);
        if (rep.difference)
            res.artifacts["difference.csv"] = field_csv(*rep.difference);
    }
    res.exit_code = exit_code(rep.verdict);
    return res;
}

} // namespace carnot
