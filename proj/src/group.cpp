#include "carnot/group.hpp"

#include "carnot/errors.hpp"

#include <cmath>
#include <map>
#include <numeric>

namespace carnot {

namespace {

int factorial(int r)
{
    int f = 1;
    for (int i = 2; i <= r; ++i)
        f *= i;
    return f;
}

double integer_power(double x, int e)
{
    double r = 1.0;
    for (int i = 0; i < e; ++i)
        r *= x;
    return r;
}

int parse_positive(const std::string& text, const std::string& full)
{
    std::size_t used = 0;
    int value = 0;
    try {
        value = std::stoi(text, &used);
    } catch (const std::exception&) {
        throw InputError("invalid group name '" + full + "'");
    }
    if (used != text.size() || value < 1)
        throw InputError("invalid group name '" + full + "'");
    return value;
}

} // namespace

CarnotGroup::CarnotGroup(std::string name, std::vector<int> layer_dims, std::vector<Bracket> brackets)
    : name_(std::move(name)), layer_dims_(std::move(layer_dims)), brackets_(std::move(brackets))
{
    if (layer_dims_.empty())
        throw InputError("group '" + name_ + "': at least one layer required");
    if (static_cast<int>(layer_dims_.size()) > max_step)
        throw InputError("group '" + name_ + "': step " + std::to_string(layer_dims_.size()) +
                         " exceeds the supported maximum of 3");
    for (int d : layer_dims_)
        if (d < 1)
            throw InputError("group '" + name_ + "': layer dimensions must be >= 1");

    n_ = std::accumulate(layer_dims_.begin(), layer_dims_.end(), 0);
    for (std::size_t layer = 0; layer < layer_dims_.size(); ++layer)
        for (int k = 0; k < layer_dims_[layer]; ++k)
            layer_of_.push_back(static_cast<int>(layer) + 1);
    gauge_exponent_ = 2 * factorial(step());

    // Collect antisymmetric structure constants keyed by (a < b, c).
    std::map<std::tuple<int, int, int>, double> table;
    std::map<std::pair<int, int>, std::vector<double>> seen;
    for (const Bracket& br : brackets_) {
        if (br.i < 0 || br.i >= n_ || br.j < 0 || br.j >= n_)
            throw InputError("group '" + name_ + "': bracket index out of range");
        if (static_cast<int>(br.out.size()) != n_)
            throw InputError("group '" + name_ + "': bracket output must have length " + std::to_string(n_));
        const bool flip = br.i > br.j;
        const int a = flip ? br.j : br.i;
        const int b = flip ? br.i : br.j;
        std::vector<double> out = br.out;
        if (flip)
            for (double& v : out)
                v = -v;
        if (a == b) {
            for (double v : out)
                if (v != 0.0)
                    throw InputError("group '" + name_ + "': [e_i, e_i] must vanish (antisymmetry)");
            continue;
        }
        auto [it, inserted] = seen.emplace(std::make_pair(a, b), out);
        if (!inserted) {
            if (it->second != out)
                throw InputError("group '" + name_ + "': conflicting brackets for pair (" +
                                 std::to_string(a + 1) + "," + std::to_string(b + 1) + ")");
            continue;
        }
        const int target = layer_of_[a] + layer_of_[b];
        for (int c = 0; c < n_; ++c) {
            if (out[c] == 0.0)
                continue;
            if (layer_of_[c] != target)
                throw InputError("group '" + name_ + "': [e" + std::to_string(a + 1) + ", e" +
                                 std::to_string(b + 1) + "] must land in layer " + std::to_string(target));
            table[{a, b, c}] = out[c];
        }
    }
    for (const auto& [key, value] : table)
        constants_.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), value});

    // Stratification: [V_1, V_j] spans V_{j+1}.
    std::vector<int> offset(step() + 1, 0);
    for (int l = 0; l < step(); ++l)
        offset[l + 1] = offset[l] + layer_dims_[l];
    for (int j = 1; j < step(); ++j) {
        const int rows = layer_dims_[j];
        Eigen::MatrixXd span(rows, layer_dims_[0] * layer_dims_[j - 1]);
        span.setZero();
        int col = 0;
        std::vector<double> ea(n_), eb(n_), out(n_);
        for (int a = 0; a < layer_dims_[0]; ++a) {
            for (int b = offset[j - 1]; b < offset[j]; ++b, ++col) {
                std::fill(ea.begin(), ea.end(), 0.0);
                std::fill(eb.begin(), eb.end(), 0.0);
                ea[a] = 1.0;
                eb[b] = 1.0;
                bracket(ea, eb, out);
                for (int r = 0; r < rows; ++r)
                    span(r, col) = out[offset[j] + r];
            }
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(span);
        if (lu.rank() != rows)
            throw InputError("group '" + name_ + "': [V_1, V_" + std::to_string(j) + "] does not span V_" +
                             std::to_string(j + 1) + " (not stratified)");
    }

    // Jacobi identity on basis triples.
    {
        std::vector<double> ea(n_), eb(n_), ec(n_), t(n_), s1(n_), s2(n_), s3(n_);
        for (int a = 0; a < n_; ++a) {
            for (int b = a + 1; b < n_; ++b) {
                for (int c = b + 1; c < n_; ++c) {
                    std::fill(ea.begin(), ea.end(), 0.0);
                    std::fill(eb.begin(), eb.end(), 0.0);
                    std::fill(ec.begin(), ec.end(), 0.0);
                    ea[a] = eb[b] = ec[c] = 1.0;
                    bracket(eb, ec, t);
                    bracket(ea, t, s1);
                    bracket(ec, ea, t);
                    bracket(eb, t, s2);
                    bracket(ea, eb, t);
                    bracket(ec, t, s3);
                    for (int k = 0; k < n_; ++k)
                        if (std::abs(s1[k] + s2[k] + s3[k]) > 1e-12)
                            throw InputError("group '" + name_ + "': Jacobi identity fails for (e" +
                                             std::to_string(a + 1) + ", e" + std::to_string(b + 1) + ", e" +
                                             std::to_string(c + 1) + ")");
                }
            }
        }
    }

    build_tables();
}

CarnotGroup CarnotGroup::euclidean(int n)
{
    if (n < 1)
        throw InputError("euclidean group dimension must be >= 1");
    return CarnotGroup("euclidean:" + std::to_string(n), {n}, {});
}

CarnotGroup CarnotGroup::heisenberg(int n)
{
    if (n < 1)
        throw InputError("heisenberg group index must be >= 1");
    std::vector<Bracket> brackets;
    for (int i = 0; i < n; ++i) {
        std::vector<double> out(2 * n + 1, 0.0);
        out[2 * n] = 1.0;
        brackets.push_back({i, n + i, out});
    }
    return CarnotGroup("heisenberg:" + std::to_string(n), {2 * n, 1}, std::move(brackets));
}

CarnotGroup CarnotGroup::engel()
{
    return CarnotGroup("engel", {2, 1, 1},
                       {{0, 1, {0.0, 0.0, 1.0, 0.0}}, {0, 2, {0.0, 0.0, 0.0, 1.0}}});
}

CarnotGroup CarnotGroup::from_name(const std::string& name)
{
    if (name == "engel")
        return engel();
    const auto colon = name.find(':');
    if (colon != std::string::npos) {
        const std::string family = name.substr(0, colon);
        const std::string arg = name.substr(colon + 1);
        if (family == "euclidean")
            return euclidean(parse_positive(arg, name));
        if (family == "heisenberg")
            return heisenberg(parse_positive(arg, name));
    }
    throw InputError("unknown group '" + name + "' (expected euclidean:n, heisenberg:n or engel)");
}

CarnotGroup CarnotGroup::from_json(const nlohmann::json& j)
{
    if (j.is_string())
        return from_name(j.get<std::string>());
    if (!j.is_object())
        throw InputError("group spec must be a name string or an object");
    try {
        const std::string name = j.value("name", std::string("custom"));
        const auto dims = j.at("layer_dims").get<std::vector<int>>();
        std::vector<Bracket> brackets;
        if (j.contains("brackets")) {
            for (const auto& b : j.at("brackets")) {
                // File indices are 1-based, matching the x1..xn variable names.
                brackets.push_back({b.at("i").get<int>() - 1, b.at("j").get<int>() - 1,
                                    b.at("out").get<std::vector<double>>()});
            }
        }
        return CarnotGroup(name, dims, std::move(brackets));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed group spec: ") + e.what());
    }
}

nlohmann::json CarnotGroup::to_json() const
{
    nlohmann::json brackets = nlohmann::json::array();
    std::map<std::pair<int, int>, std::vector<double>> grouped;
    for (const Constant& c : constants_) {
        auto& out = grouped[{c.a, c.b}];
        out.resize(n_, 0.0);
        out[c.c] = c.value;
    }
    for (const auto& [pair, out] : grouped)
        brackets.push_back({{"i", pair.first + 1}, {"j", pair.second + 1}, {"out", out}});
    return {{"name", name_}, {"layer_dims", layer_dims_}, {"brackets", brackets}};
}

void CarnotGroup::check_conformant(const Point& p) const { check_conformant(p.coords()); }

void CarnotGroup::check_conformant(std::span<const double> p) const
{
    if (static_cast<int>(p.size()) != n_)
        throw InputError("point has " + std::to_string(p.size()) + " coordinates, group '" + name_ +
                         "' has dimension " + std::to_string(n_));
}

void CarnotGroup::bracket(std::span<const double> a, std::span<const double> b, std::span<double> out) const
{
    std::fill(out.begin(), out.end(), 0.0);
    for (const Constant& k : constants_)
        out[k.c] += k.value * (a[k.a] * b[k.b] - a[k.b] * b[k.a]);
}

void CarnotGroup::bch(std::span<const double> a, std::span<const double> b, std::span<double> out) const
{
    for (int k = 0; k < n_; ++k)
        out[k] = a[k] + b[k];
    if (constants_.empty())
        return;
    double c_buf[16], ac_buf[16], bc_buf[16];
    std::vector<double> heap;
    double* c = c_buf;
    double* ac = ac_buf;
    double* bc = bc_buf;
    if (n_ > 16) {
        heap.resize(3 * n_);
        c = heap.data();
        ac = c + n_;
        bc = ac + n_;
    }
    std::span<double> cs(c, n_), acs(ac, n_), bcs(bc, n_);
    bracket(a, b, cs);
    for (int k = 0; k < n_; ++k)
        out[k] += 0.5 * c[k];
    if (step() < 3)
        return;
    // [A,[A,B]] + [B,[B,A]] = [A,C] - [B,C]
    bracket(a, cs, acs);
    bracket(b, cs, bcs);
    for (int k = 0; k < n_; ++k)
        out[k] += (ac[k] - bc[k]) / 12.0;
}

void CarnotGroup::build_tables()
{
    const int nv = 2 * n_;
    using PolyVec = std::vector<Polynomial>;
    auto poly_bracket = [&](const PolyVec& a, const PolyVec& b) {
        PolyVec out(n_, Polynomial(nv));
        for (const Constant& k : constants_)
            out[k.c] += k.value * (a[k.a] * b[k.b] - a[k.b] * b[k.a]);
        return out;
    };

    PolyVec a(n_, Polynomial(nv)), b(n_, Polynomial(nv));
    for (int k = 0; k < n_; ++k) {
        a[k] = Polynomial::variable(nv, k);
        b[k] = Polynomial::variable(nv, n_ + k);
    }
    product_.assign(n_, Polynomial(nv));
    for (int k = 0; k < n_; ++k)
        product_[k] = a[k] + b[k];
    if (step() >= 2) {
        const PolyVec c = poly_bracket(a, b);
        for (int k = 0; k < n_; ++k)
            product_[k] += 0.5 * c[k];
        if (step() >= 3) {
            const PolyVec ac = poly_bracket(a, c);
            const PolyVec bc = poly_bracket(b, c);
            for (int k = 0; k < n_; ++k)
                product_[k] += (ac[k] - bc[k]) * (1.0 / 12.0);
        }
    }

    std::vector<int> weights(nv);
    for (int k = 0; k < n_; ++k)
        weights[k] = weights[n_ + k] = layer_of_[k];
    for (int k = 0; k < n_; ++k) {
        if (!product_[k].is_weighted_homogeneous(weights) ||
            (!product_[k].is_zero() && product_[k].weighted_degree(weights) != layer_of_[k]))
            throw std::logic_error("product table is not weighted-homogeneous");
    }

    const int m = horizontal_dim();
    frame_.assign(m * n_, Polynomial(n_));
    frame_deriv_.assign(m * n_ * n_, Polynomial(n_));
    for (int l = 0; l < m; ++l) {
        for (int k = 0; k < n_; ++k) {
            frame_[l * n_ + k] = product_[k].derivative(n_ + l).truncate_variables(n_);
            for (int j = 0; j < n_; ++j)
                frame_deriv_[(l * n_ + k) * n_ + j] = frame_[l * n_ + k].derivative(j);
        }
    }

    product_dx_.assign(n_ * n_, Polynomial(nv));
    product_dxx_.assign(n_ * n_ * n_, Polynomial(nv));
    for (int c = 0; c < n_; ++c) {
        for (int i = 0; i < n_; ++i) {
            product_dx_[c * n_ + i] = product_[c].derivative(i);
            for (int j = 0; j < n_; ++j)
                product_dxx_[(c * n_ + i) * n_ + j] = product_dx_[c * n_ + i].derivative(j);
        }
    }
}

Point CarnotGroup::multiply(const Point& p, const Point& q) const
{
    check_conformant(p);
    check_conformant(q);
    std::vector<double> out(n_);
    bch(p.coords(), q.coords(), out);
    return Point(std::move(out));
}

Point CarnotGroup::multiply_by_table(const Point& p, const Point& q) const
{
    check_conformant(p);
    check_conformant(q);
    std::vector<double> pq(p.vector());
    pq.insert(pq.end(), q.vector().begin(), q.vector().end());
    std::vector<double> out(n_);
    for (int k = 0; k < n_; ++k)
        out[k] = product_[k].evaluate(pq);
    return Point(std::move(out));
}

Point CarnotGroup::inverse(const Point& p) const
{
    check_conformant(p);
    std::vector<double> out(n_);
    for (int k = 0; k < n_; ++k)
        out[k] = -p[k];
    return Point(std::move(out));
}

Point CarnotGroup::dilate(double lambda, const Point& p) const
{
    check_conformant(p);
    if (!(lambda > 0.0))
        throw InputError("dilation factor must be positive");
    std::vector<double> out(n_);
    for (int k = 0; k < n_; ++k)
        out[k] = integer_power(lambda, layer_of_[k]) * p[k];
    return Point(std::move(out));
}

double CarnotGroup::gauge_power(const Point& p) const
{
    check_conformant(p);
    const int rf = gauge_exponent_ / 2;
    double total = 0.0;
    int k = 0;
    for (int layer = 0; layer < step(); ++layer) {
        double s = 0.0;
        for (int j = 0; j < layer_dims_[layer]; ++j, ++k)
            s += p[k] * p[k];
        total += integer_power(s, rf / (layer + 1));
    }
    return total;
}

double CarnotGroup::gauge_norm(const Point& p) const
{
    return std::pow(gauge_power(p), 1.0 / gauge_exponent_);
}

double CarnotGroup::distance(const Point& p, const Point& q) const
{
    return gauge_norm(multiply(inverse(p), q));
}

double CarnotGroup::kernel(std::span<const double> x, std::span<const double> y) const
{
    double neg_buf[16], z_buf[16];
    std::vector<double> heap;
    double* neg = neg_buf;
    double* z = z_buf;
    if (n_ > 16) {
        heap.resize(2 * n_);
        neg = heap.data();
        z = neg + n_;
    }
    for (int k = 0; k < n_; ++k)
        neg[k] = -y[k];
    bch(x, std::span<const double>(neg, n_), std::span<double>(z, n_));
    const int rf = gauge_exponent_ / 2;
    double total = 0.0;
    int k = 0;
    for (int layer = 0; layer < step(); ++layer) {
        double s = 0.0;
        for (int j = 0; j < layer_dims_[layer]; ++j, ++k)
            s += z[k] * z[k];
        total += integer_power(s, rf / (layer + 1));
    }
    return total;
}

Eigen::MatrixXd CarnotGroup::kernel_hessian(std::span<const double> x, std::span<const double> y) const
{
    check_conformant(x);
    check_conformant(y);
    std::vector<double> args(2 * n_);
    for (int k = 0; k < n_; ++k) {
        args[k] = x[k];
        args[n_ + k] = -y[k];
    }
    Eigen::VectorXd z(n_);
    for (int c = 0; c < n_; ++c)
        z[c] = product_[c].evaluate(args);
    Eigen::MatrixXd jac(n_, n_);
    for (int c = 0; c < n_; ++c)
        for (int i = 0; i < n_; ++i)
            jac(c, i) = product_dx_[c * n_ + i].evaluate(args);

    // K = g(z) = Σ_layers s^e with s = Σ z_j² over the layer.
    const int rf = gauge_exponent_ / 2;
    Eigen::VectorXd grad_g = Eigen::VectorXd::Zero(n_);
    Eigen::MatrixXd hess_g = Eigen::MatrixXd::Zero(n_, n_);
    int start = 0;
    for (int layer = 0; layer < step(); ++layer) {
        const int len = layer_dims_[layer];
        const int e = rf / (layer + 1);
        double s = 0.0;
        for (int j = start; j < start + len; ++j)
            s += z[j] * z[j];
        const double d1 = e * integer_power(s, e - 1);
        const double d2 = e >= 2 ? e * (e - 1) * integer_power(s, e - 2) : 0.0;
        for (int j = start; j < start + len; ++j) {
            grad_g[j] = 2.0 * d1 * z[j];
            for (int l = start; l < start + len; ++l)
                hess_g(j, l) = 4.0 * d2 * z[j] * z[l] + (j == l ? 2.0 * d1 : 0.0);
        }
        start += len;
    }

    Eigen::MatrixXd h = jac.transpose() * hess_g * jac;
    for (int c = 0; c < n_; ++c) {
        if (grad_g[c] == 0.0)
            continue;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                h(i, j) += grad_g[c] * product_dxx_[(c * n_ + i) * n_ + j].evaluate(args);
    }
    return 0.5 * (h + h.transpose());
}

double euclidean_norm(const Point& p)
{
    double s = 0.0;
    for (double v : p.coords())
        s += v * v;
    return std::sqrt(s);
}

} // namespace carnot
