#pragma once

#include <utility>
#include <vector>

#include "frao/grid_density.hpp"

namespace frao {

// Square root of a density, a point on the nonnegative orthant of the unit
// sphere in L2. Construction renormalizes when the quadrature norm drifts
// past 1e-12 and clamps roundoff-negative values at zero-mass nodes.
class SrtDensity {
  public:
    SrtDensity() = default;
    SrtDensity(DomainSpec domain, std::vector<double> values);

    const DomainSpec& domain() const { return domain_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

  private:
    DomainSpec domain_;
    std::vector<double> values_;
};

// Element of the tangent space at `base`: orthogonal to it under the grid
// inner product. Inputs slightly off tangent (|<v,psi>| <= 1e-8 after one
// projection) are re-projected once, then validated.
class TangentVector {
  public:
    TangentVector() = default;
    TangentVector(SrtDensity base, std::vector<double> values);

    const SrtDensity& base() const { return base_; }
    const std::vector<double>& values() const { return values_; }
    double norm() const { return norm_; }
    TangentVector scaled(double c) const;
    static TangentVector zero(SrtDensity base);

  private:
    SrtDensity base_;
    std::vector<double> values_;
    double norm_ = 0.0;
};

SrtDensity to_srt(const GridDensity& p);
GridDensity from_srt(const SrtDensity& psi);

double inner(const SrtDensity& a, const SrtDensity& b);
double inner(const SrtDensity& a, const TangentVector& b);
double inner(const TangentVector& a, const TangentVector& b);

// arccos of the (clamped) Bhattacharyya coefficient; in [0, pi/2].
double fr_distance(const GridDensity& p, const GridDensity& q, Diagnostics* diag = nullptr);
double fr_distance(const SrtDensity& a, const SrtDensity& b, Diagnostics* diag = nullptr);

// eta(tau) = [sin((1-tau) theta) psi1 + sin(tau theta) psi2] / sin(theta);
// endpoints are returned bit-exactly.
SrtDensity geodesic_path(const SrtDensity& psi1, const SrtDensity& psi2, double tau);

SrtDensity exp_map(const TangentVector& v);
TangentVector log_map(const SrtDensity& from, const SrtDensity& to);

double kl_divergence(const GridDensity& p, const GridDensity& q);

// Extrinsic L2 distance ||psi1 - psi2|| (equals 2 sin(theta/2)).
double hellinger_chord(const SrtDensity& a, const SrtDensity& b);

// Evaluates both sides of the metric identity behind the square-root
// transform: <dp1/(2 sqrt p), dp2/(2 sqrt p)> and (1/4) * int dp1 dp2 / p.
// The left side runs through the tangent-vector machinery, the right is a
// direct quadrature, so agreement exercises the implementation path.
std::pair<double, double> pullback_check(const GridDensity& p,
                                         const std::vector<double>& dp1,
                                         const std::vector<double>& dp2);

}  // namespace frao
