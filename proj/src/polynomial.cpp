#include "carnot/polynomial.hpp"

#include "carnot/errors.hpp"

#include <cmath>
#include <sstream>

namespace carnot {

Polynomial Polynomial::constant(int num_vars, double c)
{
    Polynomial p(num_vars);
    p.add_term(Exponents(num_vars, 0), c);
    return p;
}

Polynomial Polynomial::variable(int num_vars, int index)
{
    Polynomial p(num_vars);
    Exponents e(num_vars, 0);
    e.at(index) = 1;
    p.add_term(e, 1.0);
    return p;
}

void Polynomial::add_term(const Exponents& e, double c)
{
    if (c == 0.0)
        return;
    auto [it, inserted] = terms_.emplace(e, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0.0)
            terms_.erase(it);
    }
}

int Polynomial::weighted_degree(std::span<const int> weights) const
{
    int best = 0;
    for (const auto& [e, c] : terms_) {
        int d = 0;
        for (int i = 0; i < num_vars_; ++i)
            d += weights[i] * e[i];
        best = std::max(best, d);
    }
    return best;
}

bool Polynomial::is_weighted_homogeneous(std::span<const int> weights) const
{
    int degree = -1;
    for (const auto& [e, c] : terms_) {
        int d = 0;
        for (int i = 0; i < num_vars_; ++i)
            d += weights[i] * e[i];
        if (degree >= 0 && d != degree)
            return false;
        degree = d;
    }
    return true;
}

double Polynomial::evaluate(std::span<const double> x) const
{
    if (static_cast<int>(x.size()) < num_vars_)
        throw InputError("polynomial evaluated with too few variables");
    double sum = 0.0;
    for (const auto& [e, c] : terms_) {
        double term = c;
        for (int i = 0; i < num_vars_; ++i)
            for (int k = 0; k < e[i]; ++k)
                term *= x[i];
        sum += term;
    }
    return sum;
}

Polynomial Polynomial::derivative(int var) const
{
    Polynomial d(num_vars_);
    for (const auto& [e, c] : terms_) {
        if (e[var] == 0)
            continue;
        Exponents f = e;
        f[var] -= 1;
        d.add_term(f, c * e[var]);
    }
    return d;
}

Polynomial Polynomial::truncate_variables(int first) const
{
    Polynomial t(first);
    for (const auto& [e, c] : terms_) {
        bool vanishes = false;
        for (int i = first; i < num_vars_; ++i)
            vanishes = vanishes || e[i] != 0;
        if (!vanishes)
            t.add_term(Exponents(e.begin(), e.begin() + first), c);
    }
    return t;
}

Polynomial& Polynomial::operator+=(const Polynomial& o)
{
    if (o.num_vars_ != num_vars_)
        throw InputError("polynomial variable count mismatch");
    for (const auto& [e, c] : o.terms_)
        add_term(e, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o)
{
    if (o.num_vars_ != num_vars_)
        throw InputError("polynomial variable count mismatch");
    for (const auto& [e, c] : o.terms_)
        add_term(e, -c);
    return *this;
}

Polynomial& Polynomial::operator*=(double s)
{
    if (s == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& [e, c] : terms_)
        c *= s;
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b)
{
    if (a.num_vars_ != b.num_vars_)
        throw InputError("polynomial variable count mismatch");
    Polynomial r(a.num_vars_);
    for (const auto& [ea, ca] : a.terms_) {
        for (const auto& [eb, cb] : b.terms_) {
            Polynomial::Exponents e(ea.size());
            for (std::size_t i = 0; i < e.size(); ++i)
                e[i] = static_cast<std::uint8_t>(ea[i] + eb[i]);
            r.add_term(e, ca * cb);
        }
    }
    return r;
}

std::string Polynomial::to_string() const
{
    if (terms_.empty())
        return "0";
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& [e, c] : terms_) {
        if (!first)
            os << " + ";
        first = false;
        os << c;
        for (int i = 0; i < num_vars_; ++i) {
            if (e[i] == 0)
                continue;
            os << "*x" << (i + 1);
            if (e[i] > 1)
                os << '^' << int(e[i]);
        }
    }
    return os.str();
}

} // namespace carnot
