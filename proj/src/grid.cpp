#include "carnot/grid.hpp"

#include "carnot/errors.hpp"
#include "carnot/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace carnot {

GridDomain::GridDomain(std::vector<Axis> axes) : axes_(std::move(axes))
{
    if (axes_.empty())
        throw InputError("grid domain needs at least one axis");
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        const Axis& a = axes_[i];
        if (a.nodes < 3)
            throw InputError("axis " + std::to_string(i + 1) + ": node count must be >= 3");
        if (!std::isfinite(a.lo) || !std::isfinite(a.hi) || !(a.lo < a.hi))
            throw InputError("axis " + std::to_string(i + 1) + ": interval must satisfy lo < hi");
    }
    strides_.assign(axes_.size(), 1);
    for (int i = dim() - 2; i >= 0; --i)
        strides_[i] = strides_[i + 1] * axes_[i + 1].nodes;
    count_ = strides_[0] * axes_[0].nodes;
}

GridDomain GridDomain::cube(int dim, double lo, double hi, std::size_t nodes)
{
    return GridDomain(std::vector<Axis>(dim, Axis{lo, hi, nodes}));
}

GridDomain GridDomain::from_json(const nlohmann::json& j)
{
    try {
        const auto intervals = j.at("intervals").get<std::vector<std::vector<double>>>();
        const auto nodes = j.at("nodes").get<std::vector<long long>>();
        if (intervals.size() != nodes.size())
            throw InputError("domain: 'intervals' and 'nodes' differ in length");
        std::vector<Axis> axes;
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            if (intervals[i].size() != 2)
                throw InputError("domain: interval " + std::to_string(i + 1) + " must be [lo, hi]");
            if (nodes[i] < 3)
                throw InputError("domain: axis " + std::to_string(i + 1) + " node count must be >= 3");
            axes.push_back({intervals[i][0], intervals[i][1], static_cast<std::size_t>(nodes[i])});
        }
        return GridDomain(std::move(axes));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed domain: ") + e.what());
    }
}

nlohmann::json GridDomain::to_json() const
{
    nlohmann::json intervals = nlohmann::json::array();
    nlohmann::json nodes = nlohmann::json::array();
    for (const Axis& a : axes_) {
        intervals.push_back({a.lo, a.hi});
        nodes.push_back(a.nodes);
    }
    return {{"intervals", intervals}, {"nodes", nodes}};
}

double GridDomain::max_spacing() const
{
    double h = 0.0;
    for (int i = 0; i < dim(); ++i)
        h = std::max(h, spacing(i));
    return h;
}

double GridDomain::coordinate(std::size_t node, int axis) const
{
    const std::size_t i = index_along(node, axis);
    const Axis& a = axes_[axis];
    if (i + 1 == a.nodes)
        return a.hi;
    return a.lo + double(i) * spacing(axis);
}

void GridDomain::coordinates(std::size_t node, std::span<double> out) const
{
    for (int k = 0; k < dim(); ++k)
        out[k] = coordinate(node, k);
}

Point GridDomain::point(std::size_t node) const
{
    std::vector<double> c(dim());
    coordinates(node, c);
    return Point(std::move(c));
}

std::vector<std::size_t> GridDomain::multi_index(std::size_t node) const
{
    std::vector<std::size_t> idx(dim());
    for (int k = 0; k < dim(); ++k)
        idx[k] = index_along(node, k);
    return idx;
}

std::size_t GridDomain::flat_index(std::span<const std::size_t> idx) const
{
    std::size_t node = 0;
    for (int k = 0; k < dim(); ++k)
        node += idx[k] * strides_[k];
    return node;
}

bool GridDomain::on_boundary(std::size_t node) const { return !has_margin(node, 1); }

bool GridDomain::has_margin(std::size_t node, std::size_t margin) const
{
    for (int k = 0; k < dim(); ++k) {
        const std::size_t i = index_along(node, k);
        if (i < margin || i + margin >= axes_[k].nodes)
            return false;
    }
    return true;
}

std::size_t GridDomain::nearest_node(std::span<const double> x) const
{
    std::size_t node = 0;
    for (int k = 0; k < dim(); ++k) {
        const double t = std::round((x[k] - axes_[k].lo) / spacing(k));
        const double clamped = std::clamp(t, 0.0, double(axes_[k].nodes - 1));
        node += static_cast<std::size_t>(clamped) * strides_[k];
    }
    return node;
}

GridField::GridField(GridDomain domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values))
{
    if (values_.size() != domain_.node_count())
        throw InputError("field has " + std::to_string(values_.size()) + " samples, grid has " +
                         std::to_string(domain_.node_count()) + " nodes");
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            throw InputError("field sample at node " + std::to_string(i) + " is not finite");
}

GridField GridField::constant(const GridDomain& domain, double c)
{
    return GridField(domain, std::vector<double>(domain.node_count(), c));
}

std::vector<bool> GridField::boundary_mask() const
{
    std::vector<bool> mask(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i)
        mask[i] = domain_.on_boundary(i);
    return mask;
}

double GridField::max_abs() const
{
    double m = 0.0;
    for (double v : values_)
        m = std::max(m, std::abs(v));
    return m;
}

double GridField::interpolate(std::span<const double> x) const
{
    const int d = domain_.dim();
    if (static_cast<int>(x.size()) != d)
        throw InputError("interpolation point has wrong dimension");
    std::vector<std::size_t> base(d);
    std::vector<double> frac(d);
    for (int k = 0; k < d; ++k) {
        const Axis& a = domain_.axis(k);
        const double h = domain_.spacing(k);
        const double slack = 1e-12 * (a.hi - a.lo);
        if (x[k] < a.lo - slack || x[k] > a.hi + slack)
            throw BoundaryError("interpolation point outside the grid on axis " + std::to_string(k + 1));
        double t = (x[k] - a.lo) / h;
        t = std::clamp(t, 0.0, double(a.nodes - 1));
        std::size_t i = static_cast<std::size_t>(std::floor(t));
        if (i + 1 >= a.nodes)
            i = a.nodes - 2;
        base[k] = i;
        frac[k] = t - double(i);
    }
    double sum = 0.0;
    std::vector<std::size_t> idx(d);
    for (std::size_t corner = 0; corner < (std::size_t(1) << d); ++corner) {
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
            const bool up = (corner >> k) & 1u;
            idx[k] = base[k] + (up ? 1 : 0);
            w *= up ? frac[k] : 1.0 - frac[k];
        }
        if (w != 0.0)
            sum += w * values_[domain_.flat_index(idx)];
    }
    return sum;
}

GridField GridField::operator-() const
{
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = -values_[i];
    return GridField(domain_, std::move(v));
}

GridField operator-(const GridField& a, const GridField& b)
{
    check_same_grid(a, b);
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = a[i] - b[i];
    return GridField(a.domain(), std::move(v));
}

GridField operator+(const GridField& a, double c)
{
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = a[i] + c;
    return GridField(a.domain(), std::move(v));
}

void check_same_grid(const GridField& a, const GridField& b)
{
    if (!(a.domain() == b.domain()))
        throw InputError("fields are sampled on different grids");
}

std::string field_csv(const GridField& field, const std::optional<std::vector<std::size_t>>& witnesses)
{
    const GridDomain& dom = field.domain();
    std::ostringstream os;
    for (int k = 0; k < dom.dim(); ++k)
        os << 'x' << (k + 1) << ',';
    os << "value";
    if (witnesses)
        os << ",witness";
    os << '\n';
    std::vector<double> x(dom.dim());
    for (std::size_t node = 0; node < field.size(); ++node) {
        dom.coordinates(node, x);
        for (double c : x)
            os << format_double(c) << ',';
        os << format_double(field[node]);
        if (witnesses)
            os << ',' << (*witnesses)[node];
        os << '\n';
    }
    return os.str();
}

void write_field_csv(const std::string& path, const GridField& field,
                     const std::optional<std::vector<std::size_t>>& witnesses)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write '" + path + "'");
    out << field_csv(field, witnesses);
}

} // namespace carnot
