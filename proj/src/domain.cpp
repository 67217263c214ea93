#include "frao/domain.hpp"

#include <cmath>
#include <numbers>

namespace frao {

std::string to_string(Topology t) {
    return t == Topology::Linear ? "Linear" : "Circular";
}

Topology topology_from_string(const std::string& s) {
    if (s == "Linear" || s == "linear") return Topology::Linear;
    if (s == "Circular" || s == "circular") return Topology::Circular;
    throw Error("unknown topology '" + s + "'");
}

void DomainSpec::validate() const {
    if (!(upper > lower)) throw Error("domain: upper must exceed lower");
    if (points_per_axis < 16) throw Error("domain: points_per_axis must be >= 16");
    if (dims < 1 || dims > 3) throw Error("domain: dims must be 1, 2 or 3");
    if (topology == Topology::Circular) {
        if (dims != 1) throw Error("domain: circular topology requires dims = 1");
        if (std::abs((upper - lower) - 2.0 * std::numbers::pi) > 1e-12)
            throw Error("domain: circular span must equal 2*pi");
    }
}

std::size_t DomainSpec::node_count() const {
    std::size_t n = 1;
    for (int a = 0; a < dims; ++a) n *= static_cast<std::size_t>(points_per_axis);
    return n;
}

double DomainSpec::spacing() const {
    if (topology == Topology::Circular) return (upper - lower) / points_per_axis;
    return (upper - lower) / (points_per_axis - 1);
}

std::array<double, 3> DomainSpec::node(std::size_t flat) const {
    std::array<double, 3> out{0.0, 0.0, 0.0};
    const auto m = static_cast<std::size_t>(points_per_axis);
    for (int a = dims - 1; a >= 0; --a) {
        out[a] = axis_coord(static_cast<int>(flat % m));
        flat /= m;
    }
    return out;
}

double DomainSpec::axis_weight(int i) const {
    double h = spacing();
    if (topology == Topology::Circular) return h;
    return (i == 0 || i == points_per_axis - 1) ? h / 2.0 : h;
}

std::vector<double> DomainSpec::axis_weights() const {
    std::vector<double> w(points_per_axis);
    for (int i = 0; i < points_per_axis; ++i) w[i] = axis_weight(i);
    return w;
}

namespace {

template <typename Term>
double accumulate_grid(const DomainSpec& d, Term term) {
    const int m = d.points_per_axis;
    const std::vector<double> w = d.axis_weights();
    double acc = 0.0;
    std::size_t flat = 0;
    switch (d.dims) {
        case 1:
            for (int i = 0; i < m; ++i, ++flat) acc += w[i] * term(flat);
            break;
        case 2:
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j, ++flat) acc += w[i] * w[j] * term(flat);
            break;
        default:
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    const double wij = w[i] * w[j];
                    for (int k = 0; k < m; ++k, ++flat) acc += wij * w[k] * term(flat);
                }
    }
    return acc;
}

}  // namespace

double quadrature_sum(const DomainSpec& d, const std::vector<double>& values) {
    if (values.size() != d.node_count()) throw Error("quadrature: value count mismatch");
    return accumulate_grid(d, [&](std::size_t i) { return values[i]; });
}

double quadrature_inner(const DomainSpec& d, const std::vector<double>& a,
                        const std::vector<double>& b) {
    if (a.size() != d.node_count() || b.size() != a.size())
        throw Error("quadrature: value count mismatch");
    return accumulate_grid(d, [&](std::size_t i) { return a[i] * b[i]; });
}

}  // namespace frao
