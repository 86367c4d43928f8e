#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace carnot {

/// Sparse multivariate polynomial with real coefficients.
///
/// Used for the Baker-Campbell-Hausdorff product table and everything derived
/// from it (coefficients of the horizontal frame and their derivatives), so
/// that derivatives are exact rather than finite-differenced.
class Polynomial {
public:
    using Exponents = std::vector<std::uint8_t>;

    explicit Polynomial(int num_vars = 0) : num_vars_(num_vars) {}

    static Polynomial constant(int num_vars, double c);
    static Polynomial variable(int num_vars, int index);

    int num_vars() const noexcept { return num_vars_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    const std::map<Exponents, double>& terms() const noexcept { return terms_; }

    /// Total degree when variable i carries weight weights[i].
    int weighted_degree(std::span<const int> weights) const;
    /// True when every monomial has the same weighted degree (or the polynomial is zero).
    bool is_weighted_homogeneous(std::span<const int> weights) const;

    double evaluate(std::span<const double> x) const;
    Polynomial derivative(int var) const;
    /// Sets the variables [first, num_vars) to zero and drops them.
    Polynomial truncate_variables(int first) const;

    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    Polynomial& operator*=(double s);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

    /// Human-readable form using x1..xk names, for debugging and CSV export.
    std::string to_string() const;

private:
    void add_term(const Exponents& e, double c);

    int num_vars_;
    std::map<Exponents, double> terms_;
};

} // namespace carnot
