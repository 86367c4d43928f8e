#pragma once

#include "carnot/polynomial.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace carnot {

/// Group element in exponential coordinates, flattened in layer order
/// (horizontal layer first).
class Point {
public:
    Point() = default;
    explicit Point(std::size_t n) : coords_(n, 0.0) {}
    explicit Point(std::vector<double> coords) : coords_(std::move(coords)) {}
    Point(std::initializer_list<double> coords) : coords_(coords) {}

    std::size_t size() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    double& operator[](std::size_t i) { return coords_[i]; }
    std::span<const double> coords() const noexcept { return coords_; }
    const std::vector<double>& vector() const noexcept { return coords_; }

    friend bool operator==(const Point&, const Point&) = default;

private:
    std::vector<double> coords_;
};

/// [e_i, e_j] = Σ_c out[c] e_c, with 0-based flat basis indices.
struct Bracket {
    int i = 0;
    int j = 0;
    std::vector<double> out;
};

/// A stratified nilpotent Lie group of step ≤ 3 in exponential coordinates.
///
/// The product is the Baker-Campbell-Hausdorff series truncated after the
/// step-3 terms, which is exact for these groups. Construction validates the
/// structure constants (antisymmetry, grading, stratification, Jacobi) and
/// derives the polynomial product table together with the coefficient
/// polynomials of the left-invariant horizontal frame.
class CarnotGroup {
public:
    static constexpr int max_step = 3;

    CarnotGroup(std::string name, std::vector<int> layer_dims, std::vector<Bracket> brackets);

    static CarnotGroup euclidean(int n);
    static CarnotGroup heisenberg(int n);
    static CarnotGroup engel();
    /// "euclidean:n", "heisenberg:n" or "engel".
    static CarnotGroup from_name(const std::string& name);
    /// Either a built-in name string or an inline { name, layer_dims, brackets } object.
    static CarnotGroup from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    const std::string& name() const noexcept { return name_; }
    int step() const noexcept { return static_cast<int>(layer_dims_.size()); }
    int dim() const noexcept { return n_; }
    int horizontal_dim() const noexcept { return layer_dims_.front(); }
    const std::vector<int>& layer_dims() const noexcept { return layer_dims_; }
    /// 1-based layer index of a flat coordinate.
    int layer_of(int coord) const { return layer_of_[coord]; }
    /// 2·r!, the power that makes the gauge norm polynomial.
    int gauge_exponent() const noexcept { return gauge_exponent_; }

    Point identity() const { return Point(static_cast<std::size_t>(n_)); }

    Point multiply(const Point& p, const Point& q) const;
    /// Same product evaluated through the polynomial table; a second route for tests.
    Point multiply_by_table(const Point& p, const Point& q) const;
    Point inverse(const Point& p) const;
    Point dilate(double lambda, const Point& p) const;

    /// N(p)^{2r!} = Σ_i |ξ_i(p)|^{2r!/i}, computed with integer powers only.
    double gauge_power(const Point& p) const;
    double gauge_norm(const Point& p) const;
    /// d(p, q) = N(p⁻¹·q).
    double distance(const Point& p, const Point& q) const;

    /// d(x⁻¹, y⁻¹)^{2r!} = N(x·y⁻¹)^{2r!}, the sup/inf-convolution kernel.
    double kernel(std::span<const double> x, std::span<const double> y) const;
    /// Exact Euclidean Hessian of the kernel in x, via the chain rule through the product table.
    Eigen::MatrixXd kernel_hessian(std::span<const double> x, std::span<const double> y) const;

    /// Polynomials in 2n variables (p then q) giving the coordinates of p·q.
    const std::vector<Polynomial>& product_table() const noexcept { return product_; }
    /// a_{lk}(x): coefficient of ∂/∂x_k in X_l, as polynomials in n variables.
    const Polynomial& frame_coefficient(int l, int k) const { return frame_[l * n_ + k]; }
    /// ∂a_{lk}/∂x_j.
    const Polynomial& frame_coefficient_derivative(int l, int k, int j) const
    {
        return frame_deriv_[(l * n_ + k) * n_ + j];
    }

    void check_conformant(const Point& p) const;
    void check_conformant(std::span<const double> p) const;

private:
    void bracket(std::span<const double> a, std::span<const double> b, std::span<double> out) const;
    void bch(std::span<const double> a, std::span<const double> b, std::span<double> out) const;
    void build_tables();

    struct Constant {
        int a, b, c;
        double value;
    };

    std::string name_;
    std::vector<int> layer_dims_;
    std::vector<int> layer_of_;
    int n_ = 0;
    int gauge_exponent_ = 2;
    std::vector<Constant> constants_; // a < b; [e_a, e_b] = value e_c
    std::vector<Bracket> brackets_;
    std::vector<Polynomial> product_;
    std::vector<Polynomial> frame_;
    std::vector<Polynomial> frame_deriv_;
    std::vector<Polynomial> product_dx_;  // [c*n + a]: ∂P_c/∂p_a
    std::vector<Polynomial> product_dxx_; // [(c*n + a)*n + b]
};

/// ‖p‖_E, the Euclidean norm of the exponential coordinates.
double euclidean_norm(const Point& p);

} // namespace carnot
