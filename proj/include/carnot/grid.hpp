#pragma once

#include "carnot/group.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace carnot {

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t nodes = 3;

    friend bool operator==(const Axis&, const Axis&) = default;
};

/// Rectangular lattice in exponential coordinates. Nodes are numbered
/// row-major: the last coordinate varies fastest.
class GridDomain {
public:
    GridDomain() = default;
    explicit GridDomain(std::vector<Axis> axes);
    /// Same interval and node count on every axis.
    static GridDomain cube(int dim, double lo, double hi, std::size_t nodes);
    /// { "intervals": [[a, b], ...], "nodes": [k, ...] }
    static GridDomain from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    int dim() const noexcept { return static_cast<int>(axes_.size()); }
    const Axis& axis(int i) const { return axes_[i]; }
    std::size_t node_count() const noexcept { return count_; }
    double spacing(int i) const { return (axes_[i].hi - axes_[i].lo) / double(axes_[i].nodes - 1); }
    double max_spacing() const;
    std::size_t stride(int i) const { return strides_[i]; }

    std::size_t index_along(std::size_t node, int axis) const { return (node / strides_[axis]) % axes_[axis].nodes; }
    double coordinate(std::size_t node, int axis) const;
    void coordinates(std::size_t node, std::span<double> out) const;
    Point point(std::size_t node) const;
    std::vector<std::size_t> multi_index(std::size_t node) const;
    std::size_t flat_index(std::span<const std::size_t> idx) const;

    bool on_boundary(std::size_t node) const;
    /// At least `margin` nodes away from every face.
    bool has_margin(std::size_t node, std::size_t margin) const;
    /// Node nearest to x (clamped to the box).
    std::size_t nearest_node(std::span<const double> x) const;

    friend bool operator==(const GridDomain& a, const GridDomain& b) { return a.axes_ == b.axes_; }

private:
    std::vector<Axis> axes_;
    std::vector<std::size_t> strides_;
    std::size_t count_ = 0;
};

/// One finite sample per node of a GridDomain.
class GridField {
public:
    GridField() = default;
    GridField(GridDomain domain, std::vector<double> values);
    static GridField constant(const GridDomain& domain, double c);

    const GridDomain& domain() const noexcept { return domain_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t node) const { return values_[node]; }

    /// Nodes on the faces of the box (the discrete ∂Ω).
    std::vector<bool> boundary_mask() const;
    double max_abs() const;

    /// Multilinear interpolation; throws BoundaryError outside the box.
    double interpolate(std::span<const double> x) const;

    GridField operator-() const;
    friend GridField operator-(const GridField& a, const GridField& b);
    friend GridField operator+(const GridField& a, double c);

private:
    GridDomain domain_;
    std::vector<double> values_;
};

void check_same_grid(const GridField& a, const GridField& b);

/// CSV with columns x1..xn, value[, witness]; one row per node in node order.
void write_field_csv(const std::string& path, const GridField& field,
                     const std::optional<std::vector<std::size_t>>& witnesses = std::nullopt);
std::string field_csv(const GridField& field,
                      const std::optional<std::vector<std::size_t>>& witnesses = std::nullopt);

} // namespace carnot
