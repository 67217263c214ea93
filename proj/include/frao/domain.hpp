#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "frao/diagnostics.hpp"

namespace frao {

enum class Topology { Linear, Circular };

std::string to_string(Topology t);
Topology topology_from_string(const std::string& s);

// Uniform tensor grid over [lower, upper]^dims. Linear grids include both
// endpoints (spacing = span/(m-1)); circular grids cover [lower, upper) with
// the endpoints identified (spacing = span/m). Nodes are flattened row-major,
// axis 0 slowest.
struct DomainSpec {
    Topology topology = Topology::Linear;
    double lower = 0.0;
    double upper = 1.0;
    int points_per_axis = 0;
    int dims = 1;

    void validate() const;

    std::size_t node_count() const;
    double spacing() const;
    double axis_coord(int i) const { return lower + i * spacing(); }
    std::array<double, 3> node(std::size_t flat) const;

    // Trapezoid (linear) / rectangle (circular) weight of node i on one axis.
    double axis_weight(int i) const;
    std::vector<double> axis_weights() const;

    bool operator==(const DomainSpec&) const = default;
};

// Composite quadrature of tabulated values; summation runs in flat-index
// order so results are identical regardless of caller threading.
double quadrature_sum(const DomainSpec& d, const std::vector<double>& values);

// sum_i w_i a_i b_i
double quadrature_inner(const DomainSpec& d, const std::vector<double>& a,
                        const std::vector<double>& b);

}  // namespace frao
