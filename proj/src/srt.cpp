#include "frao/srt.hpp"

#include <algorithm>
#include <cmath>

namespace frao {

namespace {

// theta / sin(theta), series below 1e-6 to avoid cancellation.
double theta_over_sin(double theta) {
    if (theta < 1e-6) {
        double t2 = theta * theta;
        return 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0;
    }
    return theta / std::sin(theta);
}

double clamped_arccos(double ip, Diagnostics* diag) {
    if (ip > 1.0) {
        record_clamp(diag, ip);
        ip = 1.0;
    } else if (ip < 0.0) {
        ip = 0.0;
    }
    return std::acos(ip);
}

void check_same_domain(const DomainSpec& a, const DomainSpec& b) {
    if (!(a == b)) throw Error("domain mismatch");
}

}  // namespace

SrtDensity::SrtDensity(DomainSpec domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
    domain_.validate();
    if (values_.size() != domain_.node_count())
        throw Error("srt density: value count does not match grid");
    for (double& v : values_) {
        if (!std::isfinite(v)) throw Error("srt density: non-finite value");
        if (v < 0.0) {
            // Geodesic extensions can exit the orthant by roundoff at
            // zero-mass nodes; anything materially negative is a caller bug.
            if (v < -1e-9) throw Error("srt density: negative value");
            v = 0.0;
        }
    }
    double n2 = quadrature_inner(domain_, values_, values_);
    if (!(n2 > 0.0)) throw Error("srt density: zero norm");
    if (std::abs(n2 - 1.0) > 1e-12) {
        double inv = 1.0 / std::sqrt(n2);
        for (double& v : values_) v *= inv;
    }
}

TangentVector::TangentVector(SrtDensity base, std::vector<double> values)
    : base_(std::move(base)), values_(std::move(values)) {
    if (values_.size() != base_.size()) throw Error("tangent vector: size mismatch");
    const DomainSpec& d = base_.domain();
    double ip = quadrature_inner(d, values_, base_.values());
    if (std::abs(ip) > 1e-8) {
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= ip * base_[i];
        ip = quadrature_inner(d, values_, base_.values());
        if (std::abs(ip) > 1e-8)
            throw Error("tangent vector: not orthogonal to base after re-projection");
    }
    norm_ = std::sqrt(std::max(0.0, quadrature_inner(d, values_, values_)));
}

TangentVector TangentVector::scaled(double c) const {
    std::vector<double> v = values_;
    for (double& x : v) x *= c;
    return TangentVector(base_, std::move(v));
}

TangentVector TangentVector::zero(SrtDensity base) {
    std::vector<double> v(base.size(), 0.0);
    return TangentVector(std::move(base), std::move(v));
}

SrtDensity to_srt(const GridDensity& p) {
    std::vector<double> v(p.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sqrt(p[i]);
    return SrtDensity(p.domain(), std::move(v));
}

GridDensity from_srt(const SrtDensity& psi) {
    std::vector<double> v(psi.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = psi[i] * psi[i];
    return GridDensity(psi.domain(), std::move(v));
}

double inner(const SrtDensity& a, const SrtDensity& b) {
    check_same_domain(a.domain(), b.domain());
    return quadrature_inner(a.domain(), a.values(), b.values());
}

double inner(const SrtDensity& a, const TangentVector& b) {
    check_same_domain(a.domain(), b.base().domain());
    return quadrature_inner(a.domain(), a.values(), b.values());
}

double inner(const TangentVector& a, const TangentVector& b) {
    check_same_domain(a.base().domain(), b.base().domain());
    return quadrature_inner(a.base().domain(), a.values(), b.values());
}

double fr_distance(const SrtDensity& a, const SrtDensity& b, Diagnostics* diag) {
    check_same_domain(a.domain(), b.domain());
    if (a.values() == b.values()) return 0.0;
    return clamped_arccos(inner(a, b), diag);
}

double fr_distance(const GridDensity& p, const GridDensity& q, Diagnostics* diag) {
    check_same_domain(p.domain(), q.domain());
    if (p.values() == q.values()) return 0.0;
    const DomainSpec& d = p.domain();
    const int m = d.points_per_axis;
    const std::vector<double> w = d.axis_weights();
    double bc = 0.0;
    std::size_t flat = 0;
    // sqrt(p*q) nodewise; multiplication is commutative so the distance is
    // symmetric bit-for-bit.
    switch (d.dims) {
        case 1:
            for (int i = 0; i < m; ++i, ++flat) bc += w[i] * std::sqrt(p[flat] * q[flat]);
            break;
        case 2:
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j, ++flat)
                    bc += w[i] * w[j] * std::sqrt(p[flat] * q[flat]);
            break;
        default:
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    double wij = w[i] * w[j];
                    for (int k = 0; k < m; ++k, ++flat)
                        bc += wij * w[k] * std::sqrt(p[flat] * q[flat]);
                }
    }
    return clamped_arccos(bc, diag);
}

SrtDensity geodesic_path(const SrtDensity& psi1, const SrtDensity& psi2, double tau) {
    check_same_domain(psi1.domain(), psi2.domain());
    if (tau < 0.0 || tau > 1.0) throw Error("geodesic_path: tau must lie in [0,1]");
    if (tau == 0.0) return psi1;
    if (tau == 1.0) return psi2;
    double ip = std::min(1.0, inner(psi1, psi2));
    double theta = std::acos(std::max(0.0, ip));
    if (theta < 1e-12) return psi1;  // degenerate geodesic
    double s = 1.0 / std::sin(theta);
    double c1 = std::sin((1.0 - tau) * theta) * s;
    double c2 = std::sin(tau * theta) * s;
    std::vector<double> v(psi1.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = c1 * psi1[i] + c2 * psi2[i];
    return SrtDensity(psi1.domain(), std::move(v));
}

SrtDensity exp_map(const TangentVector& v) {
    double n = v.norm();
    if (n < 1e-14) return v.base();
    double c = std::cos(n);
    double s = std::sin(n) / n;
    const SrtDensity& psi = v.base();
    std::vector<double> out(psi.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double y = c * psi[i] + s * v.values()[i];
        out[i] = y < 0.0 ? 0.0 : y;  // clamp exits from the orthant
    }
    return SrtDensity(psi.domain(), std::move(out));
}

TangentVector log_map(const SrtDensity& from, const SrtDensity& to) {
    check_same_domain(from.domain(), to.domain());
    if (from.values() == to.values()) return TangentVector::zero(from);
    double ip = std::clamp(inner(from, to), 0.0, 1.0);
    double theta = std::acos(ip);
    if (theta < 1e-14) return TangentVector::zero(from);
    double s = theta_over_sin(theta);
    std::vector<double> v(from.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * (to[i] - ip * from[i]);
    return TangentVector(from, std::move(v));
}

double kl_divergence(const GridDensity& p, const GridDensity& q) {
    check_same_domain(p.domain(), q.domain());
    const DomainSpec& d = p.domain();
    std::vector<double> terms(p.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (p[i] > 0.0) {
            if (!(q[i] > 0.0))
                throw Error("kl_divergence: q vanishes where p is positive (node " +
                            std::to_string(i) + ")");
            terms[i] = p[i] * std::log(p[i] / q[i]);
        } else {
            terms[i] = 0.0;  // 0 log 0 convention
        }
    }
    return quadrature_sum(d, terms);
}

double hellinger_chord(const SrtDensity& a, const SrtDensity& b) {
    check_same_domain(a.domain(), b.domain());
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a[i] - b[i];
    return std::sqrt(std::max(0.0, quadrature_inner(a.domain(), diff, diff)));
}

std::pair<double, double> pullback_check(const GridDensity& p,
                                         const std::vector<double>& dp1,
                                         const std::vector<double>& dp2) {
    const DomainSpec& d = p.domain();
    if (dp1.size() != p.size() || dp2.size() != p.size())
        throw Error("pullback_check: size mismatch");
    for (const auto* dp : {&dp1, &dp2}) {
        double total = quadrature_sum(d, *dp);
        double scale = 0.0;
        for (double v : *dp) scale = std::max(scale, std::abs(v));
        if (std::abs(total) > 1e-6 * std::max(1.0, scale))
            throw Error("pullback_check: perturbation does not integrate to 0");
    }
    SrtDensity psi = to_srt(p);
    auto push = [&](const std::vector<double>& dp) {
        std::vector<double> u(dp.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (psi[i] > 0.0) {
                u[i] = dp[i] / (2.0 * psi[i]);
            } else if (dp[i] != 0.0) {
                throw Error("pullback_check: density vanishes where a perturbation does not");
            }
        }
        return TangentVector(psi, std::move(u));
    };
    double lhs = inner(push(dp1), push(dp2));
    std::vector<double> terms(p.size(), 0.0);
    for (std::size_t i = 0; i < terms.size(); ++i)
        if (p[i] > 0.0) terms[i] = dp1[i] * dp2[i] / p[i];
    double rhs = 0.25 * quadrature_sum(d, terms);
    return {lhs, rhs};
}

}  // namespace frao
