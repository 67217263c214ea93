#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frao/domain.hpp"

namespace frao {

// A probability density tabulated on a uniform grid. Construction
// renormalizes to unit integral under the grid quadrature, so the integral
// invariant holds by construction; negative or non-finite input is rejected.
class GridDensity {
  public:
    GridDensity() = default;
    GridDensity(DomainSpec domain, std::vector<double> values);

    const DomainSpec& domain() const { return domain_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    // Multilinear interpolation; exact at nodes. Throws for points outside a
    // linear domain; circular coordinates wrap modulo the period.
    double evaluate(std::span<const double> x) const;
    double evaluate(double x) const { return evaluate(std::span<const double>(&x, 1)); }

    std::string to_csv() const;
    static GridDensity from_csv_text(const std::string& text);

  private:
    DomainSpec domain_;
    std::vector<double> values_;
};

double integrate(const GridDensity& p);

struct SampleSet {
    int dims = 1;
    std::vector<double> draws;    // row-major, size() * dims
    std::vector<double> weights;  // empty = uniform; else nonnegative, sums to 1

    std::size_t size() const { return dims > 0 ? draws.size() / dims : 0; }
    std::span<const double> draw(std::size_t i) const {
        return {draws.data() + i * static_cast<std::size_t>(dims),
                static_cast<std::size_t>(dims)};
    }
    SampleSet prefix(std::size_t n) const;
    void validate() const;

    // Plain CSV, one draw per row; a numeric header row is treated as data.
    static SampleSet load_csv(const std::string& path);
};

enum class Family {
    Normal,          // {mu, sigma}
    SkewNormal,      // {location, scale, alpha}
    StudentT,        // {df [, location, scale]}
    Gamma,           // {shape, rate}
    VonMises,        // {mu, kappa}, circular
    WrappedLaplace,  // {lambda, eta}, circular, mode 0
    MultivariateNormal,  // {mu_1..mu_d, upper-triangle of Sigma row-major}
};

std::string to_string(Family f);
Family family_from_string(const std::string& s);

GridDensity make_parametric(Family family, std::span<const double> params,
                            const DomainSpec& domain, Diagnostics* diag = nullptr);

// Pilot-moment placement: [mean - 8 sd, mean + 8 sd] per axis (hull across
// axes), with the module's default resolution for the dimension unless
// `points` is given. Circular families get the canonical [0, 2pi) circle.
DomainSpec default_domain(Family family, std::span<const double> params, int points = 0);

int default_points_per_axis(int dims);

// Gaussian-kernel density estimate tabulated on `domain`, then renormalized.
// Default bandwidth per axis: 1.06 * sd * n^(-1/5).
GridDensity kde(const SampleSet& samples, const DomainSpec& domain,
                std::optional<double> bandwidth = std::nullopt);

}  // namespace frao
