#include "carnot/expr.hpp"

#include "carnot/errors.hpp"
#include "carnot/format.hpp"
#include "carnot/polynomial.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace carnot {

namespace {

std::shared_ptr<ExprNode> make(ExprKind kind)
{
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    return n;
}

Expr binary(ExprKind kind, const Expr& a, const Expr& b)
{
    auto n = make(kind);
    n->args = {a, b};
    return Expr(n);
}

bool is_number(const Expr& e) { return e.kind() == ExprKind::number; }
bool is_number(const Expr& e, double v) { return is_number(e) && e.node().value == v; }

bool finite_fold(double v) { return std::isfinite(v); }

const char* function_name(Function f)
{
    switch (f) {
    case Function::exp: return "exp";
    case Function::log: return "log";
    case Function::sqrt: return "sqrt";
    case Function::abs: return "abs";
    case Function::min: return "min";
    case Function::max: return "max";
    case Function::sin: return "sin";
    case Function::cos: return "cos";
    }
    return "?";
}

std::optional<Function> function_from_name(const std::string& s)
{
    static const std::pair<const char*, Function> table[] = {
        {"exp", Function::exp}, {"log", Function::log}, {"sqrt", Function::sqrt}, {"abs", Function::abs},
        {"min", Function::min}, {"max", Function::max}, {"sin", Function::sin},   {"cos", Function::cos}};
    for (const auto& [name, f] : table)
        if (s == name)
            return f;
    return std::nullopt;
}

std::size_t arity(Function f) { return (f == Function::min || f == Function::max) ? 2 : 1; }

double int_power(double x, int k)
{
    if (k < 0) {
        if (x == 0.0)
            throw DomainError("zero raised to a negative power");
        return 1.0 / int_power(x, -k);
    }
    double r = 1.0;
    for (int i = 0; i < k; ++i)
        r *= x;
    return r;
}

// ---------------------------------------------------------------- printing

int precedence(const Expr& e)
{
    switch (e.kind()) {
    case ExprKind::number: return std::signbit(e.node().value) ? 3 : 5;
    case ExprKind::variable: return 5;
    case ExprKind::call: return 5;
    case ExprKind::power: return 4;
    case ExprKind::negate: return 3;
    case ExprKind::multiply:
    case ExprKind::divide: return 2;
    case ExprKind::add:
    case ExprKind::subtract: return 1;
    }
    return 0;
}

void print(const Expr& e, int min_prec, std::string& out)
{
    const bool paren = precedence(e) < min_prec;
    if (paren)
        out += '(';
    const ExprNode& n = e.node();
    switch (n.kind) {
    case ExprKind::number: out += format_double(n.value); break;
    case ExprKind::variable: out += n.name; break;
    case ExprKind::negate:
        out += '-';
        print(n.args[0], 3, out);
        break;
    case ExprKind::add:
    case ExprKind::subtract:
        print(n.args[0], 1, out);
        out += n.kind == ExprKind::add ? " + " : " - ";
        print(n.args[1], 2, out);
        break;
    case ExprKind::multiply:
    case ExprKind::divide:
        print(n.args[0], 2, out);
        out += n.kind == ExprKind::multiply ? '*' : '/';
        print(n.args[1], 3, out);
        break;
    case ExprKind::power:
        print(n.args[0], 5, out);
        out += '^';
        out += std::to_string(n.index);
        break;
    case ExprKind::call:
        out += function_name(n.function);
        out += '(';
        for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i)
                out += ", ";
            print(n.args[i], 0, out);
        }
        out += ')';
        break;
    }
    if (paren)
        out += ')';
}

// ---------------------------------------------------------------- parsing

class Parser {
public:
    Parser(const std::string& text, const VariableResolver& resolve) : s_(text), resolve_(resolve) {}

    Expr run()
    {
        Expr e = expr();
        skip();
        if (pos_ != s_.size())
            throw ParseError(pos_, std::string("unexpected '") + s_[pos_] + "'");
        return e;
    }

private:
    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c))
            throw ParseError(pos_, std::string("expected '") + c + "'");
    }

    Expr expr()
    {
        Expr e = term();
        for (;;) {
            if (accept('+'))
                e = binary(ExprKind::add, e, term());
            else if (accept('-'))
                e = binary(ExprKind::subtract, e, term());
            else
                return e;
        }
    }

    Expr term()
    {
        Expr e = unary();
        for (;;) {
            if (accept('*'))
                e = binary(ExprKind::multiply, e, unary());
            else if (accept('/'))
                e = binary(ExprKind::divide, e, unary());
            else
                return e;
        }
    }

    Expr unary()
    {
        if (accept('-')) {
            Expr operand = unary();
            if (is_number(operand))
                return Expr::number(-operand.node().value);
            auto n = make(ExprKind::negate);
            n->args = {operand};
            return Expr(n);
        }
        return power();
    }

    Expr power()
    {
        Expr base = primary();
        if (!accept('^'))
            return base;
        skip();
        const std::size_t start = pos_;
        bool negative = false;
        if (pos_ < s_.size() && s_[pos_] == '-') {
            negative = true;
            ++pos_;
        }
        std::size_t digits_start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        if (pos_ == digits_start)
            throw ParseError(start, "exponent must be an integer literal");
        if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E'))
            throw ParseError(start, "exponent must be an integer literal");
        int k = 0;
        auto [ptr, ec] = std::from_chars(s_.data() + digits_start, s_.data() + pos_, k);
        if (ec != std::errc())
            throw ParseError(start, "exponent out of range");
        auto n = make(ExprKind::power);
        n->index = negative ? -k : k;
        n->args = {base};
        return Expr(n);
    }

    Expr primary()
    {
        skip();
        if (pos_ >= s_.size())
            throw ParseError(pos_, "unexpected end of input");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return identifier();
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        throw ParseError(pos_, std::string("unexpected '") + c + "'");
    }

    Expr number()
    {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
            ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-'))
                ++pos_;
            const std::size_t exp_digits = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
            if (pos_ == exp_digits)
                pos_ = save;
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (ec != std::errc() || ptr != s_.data() + pos_ || !std::isfinite(v))
            throw ParseError(start, "malformed number");
        return Expr::number(v);
    }

    Expr identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        const std::string name = s_.substr(start, pos_ - start);
        if (accept('(')) {
            const auto f = function_from_name(name);
            if (!f)
                throw ParseError(start, "unknown function '" + name + "'");
            std::vector<Expr> args{expr()};
            while (accept(','))
                args.push_back(expr());
            expect(')');
            if (args.size() != arity(*f))
                throw ParseError(start, "function '" + name + "' takes " + std::to_string(arity(*f)) +
                                            " argument(s)");
            auto n = make(ExprKind::call);
            n->function = *f;
            n->args = std::move(args);
            return Expr(n);
        }
        const auto index = resolve_(name);
        if (!index)
            throw ParseError(start, "unknown identifier '" + name + "'");
        return Expr::variable(*index, name);
    }

    const std::string& s_;
    const VariableResolver& resolve_;
    std::size_t pos_ = 0;
};

} // namespace

// ---------------------------------------------------------------- Expr

Expr Expr::number(double v)
{
    auto n = make(ExprKind::number);
    n->value = v;
    return Expr(n);
}

Expr Expr::variable(int index, std::string name)
{
    auto n = make(ExprKind::variable);
    n->index = index;
    n->name = std::move(name);
    return Expr(n);
}

Expr Expr::coordinate(int index) { return variable(index, "x" + std::to_string(index + 1)); }

ExprKind Expr::kind() const
{
    if (!node_)
        throw InputError("empty expression");
    return node_->kind;
}

std::string Expr::to_string() const
{
    std::string out;
    print(*this, 0, out);
    return out;
}

int Expr::max_variable() const
{
    if (kind() == ExprKind::variable)
        return node_->index;
    int m = -1;
    for (const Expr& a : node_->args)
        m = std::max(m, a.max_variable());
    return m;
}

bool Expr::depends_on(int var) const
{
    if (kind() == ExprKind::variable)
        return node_->index == var;
    for (const Expr& a : node_->args)
        if (a.depends_on(var))
            return true;
    return false;
}

bool Expr::is_smooth() const
{
    if (kind() == ExprKind::call &&
        (node_->function == Function::abs || node_->function == Function::min || node_->function == Function::max))
        return false;
    for (const Expr& a : node_->args)
        if (!a.is_smooth())
            return false;
    return true;
}

bool operator==(const Expr& a, const Expr& b)
{
    if (a.node_ == b.node_)
        return true;
    if (!a.node_ || !b.node_)
        return false;
    const ExprNode& x = *a.node_;
    const ExprNode& y = *b.node_;
    if (x.kind != y.kind || x.args.size() != y.args.size())
        return false;
    switch (x.kind) {
    case ExprKind::number:
        if (!(x.value == y.value && std::signbit(x.value) == std::signbit(y.value)))
            return false;
        break;
    case ExprKind::variable:
        if (x.index != y.index || x.name != y.name)
            return false;
        break;
    case ExprKind::power:
        if (x.index != y.index)
            return false;
        break;
    case ExprKind::call:
        if (x.function != y.function)
            return false;
        break;
    default: break;
    }
    for (std::size_t i = 0; i < x.args.size(); ++i)
        if (!(x.args[i] == y.args[i]))
            return false;
    return true;
}

// ---------------------------------------------------------------- builders

Expr operator+(const Expr& a, const Expr& b)
{
    if (is_number(a) && is_number(b) && finite_fold(a.node().value + b.node().value))
        return Expr::number(a.node().value + b.node().value);
    if (is_number(a, 0.0))
        return b;
    if (is_number(b, 0.0))
        return a;
    return binary(ExprKind::add, a, b);
}

Expr operator-(const Expr& a, const Expr& b)
{
    if (is_number(a) && is_number(b) && finite_fold(a.node().value - b.node().value))
        return Expr::number(a.node().value - b.node().value);
    if (is_number(b, 0.0))
        return a;
    if (is_number(a, 0.0))
        return -b;
    return binary(ExprKind::subtract, a, b);
}

Expr operator*(const Expr& a, const Expr& b)
{
    if (is_number(a) && is_number(b) && finite_fold(a.node().value * b.node().value))
        return Expr::number(a.node().value * b.node().value);
    if (is_number(a, 0.0) || is_number(b, 0.0))
        return Expr::number(0.0);
    if (is_number(a, 1.0))
        return b;
    if (is_number(b, 1.0))
        return a;
    if (is_number(a, -1.0))
        return -b;
    if (is_number(b, -1.0))
        return -a;
    if (is_number(b))
        return b * a;
    if (is_number(a) && b.kind() == ExprKind::multiply && is_number(b.node().args[0]))
        return Expr::number(a.node().value * b.node().args[0].node().value) * b.node().args[1];
    return binary(ExprKind::multiply, a, b);
}

Expr operator/(const Expr& a, const Expr& b)
{
    if (is_number(a) && is_number(b) && b.node().value != 0.0 && finite_fold(a.node().value / b.node().value))
        return Expr::number(a.node().value / b.node().value);
    if (is_number(b, 1.0))
        return a;
    if (is_number(a, 0.0) && is_number(b) && b.node().value != 0.0)
        return Expr::number(0.0);
    return binary(ExprKind::divide, a, b);
}

Expr operator-(const Expr& a)
{
    if (is_number(a))
        return Expr::number(-a.node().value);
    if (a.kind() == ExprKind::negate)
        return a.node().args[0];
    auto n = make(ExprKind::negate);
    n->args = {a};
    return Expr(n);
}

Expr pow(const Expr& base, int exponent)
{
    if (exponent == 0)
        return Expr::number(1.0);
    if (exponent == 1)
        return base;
    if (is_number(base) && !(base.node().value == 0.0 && exponent < 0)) {
        const double v = int_power(base.node().value, exponent);
        if (std::isfinite(v))
            return Expr::number(v);
    }
    auto n = make(ExprKind::power);
    n->index = exponent;
    n->args = {base};
    return Expr(n);
}

Expr call(Function f, std::vector<Expr> args)
{
    if (args.size() != arity(f))
        throw InputError(std::string("function '") + function_name(f) + "' arity mismatch");
    auto n = make(ExprKind::call);
    n->function = f;
    n->args = std::move(args);
    return Expr(n);
}

std::optional<int> coordinate_variables(const std::string& name)
{
    if (name.size() < 2 || name[0] != 'x' || name[1] == '0')
        return std::nullopt;
    int k = 0;
    auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
    if (ec != std::errc() || ptr != name.data() + name.size() || k < 1)
        return std::nullopt;
    return k - 1;
}

Expr parse(const std::string& text, const VariableResolver& resolve)
{
    return Parser(text, resolve).run();
}

// ---------------------------------------------------------------- evaluation

double evaluate(const Expr& e, std::span<const double> vars)
{
    const ExprNode& n = e.node();
    switch (n.kind) {
    case ExprKind::number: return n.value;
    case ExprKind::variable:
        if (n.index < 0 || static_cast<std::size_t>(n.index) >= vars.size())
            throw InputError("variable '" + n.name + "' is outside the " + std::to_string(vars.size()) +
                             "-dimensional coordinate space");
        return vars[n.index];
    case ExprKind::negate: return -evaluate(n.args[0], vars);
    case ExprKind::add: return evaluate(n.args[0], vars) + evaluate(n.args[1], vars);
    case ExprKind::subtract: return evaluate(n.args[0], vars) - evaluate(n.args[1], vars);
    case ExprKind::multiply: return evaluate(n.args[0], vars) * evaluate(n.args[1], vars);
    case ExprKind::divide: {
        const double num = evaluate(n.args[0], vars);
        const double den = evaluate(n.args[1], vars);
        if (den == 0.0)
            throw DomainError("division by zero");
        return num / den;
    }
    case ExprKind::power: return int_power(evaluate(n.args[0], vars), n.index);
    case ExprKind::call: {
        const double a = evaluate(n.args[0], vars);
        switch (n.function) {
        case Function::exp: return std::exp(a);
        case Function::log:
            if (!(a > 0.0))
                throw DomainError("log of a non-positive value");
            return std::log(a);
        case Function::sqrt:
            if (a < 0.0)
                throw DomainError("sqrt of a negative value");
            return std::sqrt(a);
        case Function::abs: return std::abs(a);
        case Function::min: return std::min(a, evaluate(n.args[1], vars));
        case Function::max: return std::max(a, evaluate(n.args[1], vars));
        case Function::sin: return std::sin(a);
        case Function::cos: return std::cos(a);
        }
    }
    }
    throw std::logic_error("unhandled expression kind");
}

// ---------------------------------------------------------------- calculus

Expr differentiate(const Expr& e, int var)
{
    if (!e.depends_on(var))
        return Expr::number(0.0);
    const ExprNode& n = e.node();
    switch (n.kind) {
    case ExprKind::number: return Expr::number(0.0);
    case ExprKind::variable: return Expr::number(1.0);
    case ExprKind::negate: return -differentiate(n.args[0], var);
    case ExprKind::add: return differentiate(n.args[0], var) + differentiate(n.args[1], var);
    case ExprKind::subtract: return differentiate(n.args[0], var) - differentiate(n.args[1], var);
    case ExprKind::multiply: {
        const Expr& a = n.args[0];
        const Expr& b = n.args[1];
        return differentiate(a, var) * b + a * differentiate(b, var);
    }
    case ExprKind::divide: {
        const Expr& a = n.args[0];
        const Expr& b = n.args[1];
        const Expr db = differentiate(b, var);
        if (is_number(db, 0.0))
            return differentiate(a, var) / b;
        return (differentiate(a, var) * b - a * db) / pow(b, 2);
    }
    case ExprKind::power: {
        const Expr& u = n.args[0];
        return Expr::number(n.index) * pow(u, n.index - 1) * differentiate(u, var);
    }
    case ExprKind::call: {
        const Expr& u = n.args[0];
        switch (n.function) {
        case Function::exp: return e * differentiate(u, var);
        case Function::log: return differentiate(u, var) / u;
        case Function::sqrt: return differentiate(u, var) / (Expr::number(2.0) * e);
        case Function::sin: return call(Function::cos, {u}) * differentiate(u, var);
        case Function::cos: return -(call(Function::sin, {u}) * differentiate(u, var));
        case Function::abs:
        case Function::min:
        case Function::max:
            throw NonsmoothError(std::string("cannot differentiate through ") + function_name(n.function) +
                                 " in '" + e.to_string() + "'");
        }
    }
    }
    throw std::logic_error("unhandled expression kind");
}

Expr substitute(const Expr& e, const std::vector<Expr>& replacements)
{
    const ExprNode& n = e.node();
    auto sub = [&](std::size_t i) { return substitute(n.args[i], replacements); };
    switch (n.kind) {
    case ExprKind::number: return e;
    case ExprKind::variable:
        if (n.index < 0 || static_cast<std::size_t>(n.index) >= replacements.size())
            throw InputError("no replacement for variable '" + n.name + "'");
        return replacements[n.index];
    case ExprKind::negate: return -sub(0);
    case ExprKind::add: return sub(0) + sub(1);
    case ExprKind::subtract: return sub(0) - sub(1);
    case ExprKind::multiply: return sub(0) * sub(1);
    case ExprKind::divide: return sub(0) / sub(1);
    case ExprKind::power: return pow(sub(0), n.index);
    case ExprKind::call: {
        std::vector<Expr> args;
        for (std::size_t i = 0; i < n.args.size(); ++i)
            args.push_back(sub(i));
        return call(n.function, std::move(args));
    }
    }
    throw std::logic_error("unhandled expression kind");
}

Expr polynomial_expr(const Polynomial& p)
{
    Expr sum = Expr::number(0.0);
    for (const auto& [exps, c] : p.terms()) {
        Expr term = Expr::number(c);
        for (int i = 0; i < p.num_vars(); ++i)
            if (exps[i] > 0)
                term = term * pow(Expr::coordinate(i), exps[i]);
        sum = sum + term;
    }
    return sum;
}

SymbolicJet::SymbolicJet(const Expr& f, int n) : n_(n), f_(f)
{
    if (f.max_variable() >= n)
        throw InputError("expression '" + f.to_string() + "' uses a variable beyond x" + std::to_string(n));
    grad_.reserve(n);
    for (int i = 0; i < n; ++i)
        grad_.push_back(differentiate(f, i));
    hess_.assign(n * n, Expr::number(0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            hess_[i * n + j] = hess_[j * n + i] = differentiate(grad_[i], j);
}

Eigen::VectorXd SymbolicJet::gradient_at(std::span<const double> x) const
{
    Eigen::VectorXd g(n_);
    for (int i = 0; i < n_; ++i)
        g[i] = evaluate(grad_[i], x);
    return g;
}

Eigen::MatrixXd SymbolicJet::hessian_at(std::span<const double> x) const
{
    Eigen::MatrixXd h(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = i; j < n_; ++j)
            h(i, j) = h(j, i) = evaluate(hess_[i * n_ + j], x);
    return h;
}

// ---------------------------------------------------------------- sampling

namespace {

void check_sampling(const Expr& e, const CarnotGroup& g, const GridDomain& dom)
{
    if (dom.dim() != g.dim())
        throw InputError("grid has dimension " + std::to_string(dom.dim()) + ", group '" + g.name() +
                         "' has dimension " + std::to_string(g.dim()));
    if (e.max_variable() >= g.dim())
        throw InputError("expression '" + e.to_string() + "' uses x" + std::to_string(e.max_variable() + 1) +
                         " but the group has dimension " + std::to_string(g.dim()));
}

[[noreturn]] void rethrow_at_node(const GridDomain& dom, std::size_t node, const std::string& what)
{
    std::string where = "(";
    for (int k = 0; k < dom.dim(); ++k)
        where += (k ? ", " : "") + format_double(dom.coordinate(node, k));
    throw DomainError("at node " + std::to_string(node) + " " + where + "): " + what);
}

} // namespace

GridField sample(const Expr& e, const CarnotGroup& g, const GridDomain& dom)
{
    check_sampling(e, g, dom);
    const std::size_t count = dom.node_count();
    std::vector<double> values(count);
    std::vector<std::string> errors(count);
    const long long total = static_cast<long long>(count);
#pragma omp parallel
    {
        std::vector<double> x(dom.dim());
#pragma omp for schedule(static)
        for (long long node = 0; node < total; ++node) {
            dom.coordinates(node, x);
            try {
                values[node] = evaluate(e, x);
                if (!std::isfinite(values[node]))
                    errors[node] = "non-finite value";
            } catch (const std::exception& ex) {
                errors[node] = ex.what();
            }
        }
    }
    for (std::size_t node = 0; node < count; ++node)
        if (!errors[node].empty())
            rethrow_at_node(dom, node, errors[node]);
    return GridField(dom, std::move(values));
}

GridField serial::sample(const Expr& e, const CarnotGroup& g, const GridDomain& dom)
{
    check_sampling(e, g, dom);
    std::vector<double> values(dom.node_count());
    std::vector<double> x(dom.dim());
    for (std::size_t node = 0; node < values.size(); ++node) {
        dom.coordinates(node, x);
        try {
            values[node] = evaluate(e, x);
        } catch (const std::exception& ex) {
            rethrow_at_node(dom, node, ex.what());
        }
        if (!std::isfinite(values[node]))
            rethrow_at_node(dom, node, "non-finite value");
    }
    return GridField(dom, std::move(values));
}

} // namespace carnot
