#include "frao/contamination.hpp"

#include <algorithm>
#include <cmath>

namespace frao {

std::string to_string(ContaminationMode m) {
    return m == ContaminationMode::Geometric ? "geometric" : "linear";
}

ContaminationMode contamination_mode_from_string(const std::string& s) {
    if (s == "geometric" || s == "Geometric") return ContaminationMode::Geometric;
    if (s == "linear" || s == "Linear") return ContaminationMode::Linear;
    throw Error("unknown contamination mode '" + s + "'");
}

LikelihoodSlices LikelihoodSlices::tabulate(
    const DomainSpec& x_domain, const DomainSpec& theta_domain,
    const std::function<double(double, double)>& f_x_given_theta) {
    x_domain.validate();
    theta_domain.validate();
    if (x_domain.dims != 1 || theta_domain.dims != 1)
        throw Error("likelihood slices support univariate x and theta");
    LikelihoodSlices out{x_domain, theta_domain, {}};
    const std::size_t nx = x_domain.node_count();
    const std::size_t nt = theta_domain.node_count();
    out.values.resize(nx * nt);
    for (std::size_t it = 0; it < nt; ++it) {
        double theta = theta_domain.axis_coord(static_cast<int>(it));
        for (std::size_t ix = 0; ix < nx; ++ix)
            out.values[it * nx + ix] = f_x_given_theta(x_domain.axis_coord(static_cast<int>(ix)), theta);
    }
    return out;
}

std::span<const double> LikelihoodSlices::slice(std::size_t i_theta) const {
    const std::size_t nx = x_domain.node_count();
    return {values.data() + i_theta * nx, nx};
}

void LikelihoodSlices::validate_normalized(double tol) const {
    const std::size_t nt = theta_domain.node_count();
    std::vector<double> tmp(x_domain.node_count());
    for (std::size_t it = 0; it < nt; ++it) {
        auto s = slice(it);
        std::copy(s.begin(), s.end(), tmp.begin());
        double total = quadrature_sum(x_domain, tmp);
        if (std::abs(total - 1.0) > tol)
            throw Error("likelihood slice " + std::to_string(it) +
                        " does not integrate to 1 (got " + std::to_string(total) + ")");
    }
}

void ContaminationClass::validate() const {
    if (contaminants.empty()) throw Error("contamination class: no contaminants");
    if (epsilons.empty()) throw Error("contamination class: no epsilons");
    for (const auto& [id, g] : contaminants)
        if (!(g.domain() == baseline.domain()))
            throw Error("contamination class: contaminant '" + id + "' on a different domain");
    double prev = -1.0;
    for (double e : epsilons) {
        if (e < 0.0 || e > 1.0) throw Error("contamination class: epsilon outside [0,1]");
        if (e < prev) throw Error("contamination class: epsilons must be sorted");
        prev = e;
    }
}

TangentVector perturbation_vector(const GridDensity& baseline, const GridDensity& g) {
    return log_map(to_srt(baseline), to_srt(g));
}

GridDensity contaminate(const GridDensity& baseline, const GridDensity& g, double eps) {
    if (eps < 0.0 || eps > 1.0) throw Error("contaminate: epsilon outside [0,1]");
    if (eps == 0.0) return baseline;
    TangentVector v = perturbation_vector(baseline, g);
    return from_srt(exp_map(v.scaled(eps)));
}

GridDensity contaminate_linear(const GridDensity& baseline, const GridDensity& g, double eps) {
    if (eps < 0.0 || eps > 1.0) throw Error("contaminate_linear: epsilon outside [0,1]");
    if (!(baseline.domain() == g.domain())) throw Error("domain mismatch");
    std::vector<double> v(baseline.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = (1.0 - eps) * baseline[i] + eps * g[i];
    return GridDensity(baseline.domain(), std::move(v));
}

GridDensity contaminated_prior(const ContaminationClass& cls, const GridDensity& g, double eps) {
    return cls.mode == ContaminationMode::Geometric ? contaminate(cls.baseline, g, eps)
                                                    : contaminate_linear(cls.baseline, g, eps);
}

void for_each_entry(const ContaminationClass& cls,
                    const std::function<void(const std::string&, double, const GridDensity&)>& fn) {
    cls.validate();
    for (const auto& [id, g] : cls.contaminants)
        for (double eps : cls.epsilons) fn(id, eps, contaminated_prior(cls, g, eps));
}

std::vector<ContaminationEntry> enumerate_class(const ContaminationClass& cls) {
    std::vector<ContaminationEntry> out;
    out.reserve(cls.entry_count());
    for_each_entry(cls, [&](const std::string& id, double eps, const GridDensity& d) {
        out.push_back({id, eps, d});
    });
    return out;
}

std::pair<double, double> joint_isometry_check(const GridDensity& pi0, const GridDensity& g1,
                                               const GridDensity& g2, const LikelihoodSlices& f) {
    if (!(pi0.domain() == f.theta_domain)) throw Error("joint check: theta domain mismatch");
    f.validate_normalized();
    TangentVector v1 = perturbation_vector(pi0, g1);
    TangentVector v2 = perturbation_vector(pi0, g2);

    // Joint space: int int f(x|theta) v1(theta) v2(theta) dx dtheta.
    const std::size_t nt = f.theta_domain.node_count();
    std::vector<double> slice_mass(nt);
    std::vector<double> tmp(f.x_domain.node_count());
    for (std::size_t it = 0; it < nt; ++it) {
        auto s = f.slice(it);
        std::copy(s.begin(), s.end(), tmp.begin());
        slice_mass[it] = quadrature_sum(f.x_domain, tmp);
    }
    std::vector<double> joint_terms(nt);
    for (std::size_t it = 0; it < nt; ++it)
        joint_terms[it] = v1.values()[it] * v2.values()[it] * slice_mass[it];
    double joint = quadrature_sum(f.theta_domain, joint_terms);

    double prior = inner(v1, v2);
    return {joint, prior};
}

double prior_likelihood_orthogonality_check(const LikelihoodSlices& f0, const GridDensity& pi0,
                                            const LikelihoodSlices& q, const GridDensity& g) {
    if (!(pi0.domain() == f0.theta_domain)) throw Error("orthogonality check: theta domain mismatch");
    if (!(q.x_domain == f0.x_domain) || !(q.theta_domain == f0.theta_domain))
        throw Error("orthogonality check: likelihood grids differ");
    f0.validate_normalized();
    q.validate_normalized();

    TangentVector vg = perturbation_vector(pi0, g);
    SrtDensity spi0 = to_srt(pi0);

    const std::size_t nt = f0.theta_domain.node_count();
    const std::size_t nx = f0.x_domain.node_count();
    std::vector<double> theta_terms(nt);
    std::vector<double> froot(nx), qroot(nx);
    for (std::size_t it = 0; it < nt; ++it) {
        auto fs = f0.slice(it);
        auto qs = q.slice(it);
        for (std::size_t ix = 0; ix < nx; ++ix) {
            froot[ix] = std::sqrt(fs[ix]);
            qroot[ix] = std::sqrt(qs[ix]);
        }
        SrtDensity psi_f(f0.x_domain, froot);
        TangentVector dq = log_map(psi_f, SrtDensity(f0.x_domain, qroot));
        // int sqrt(f0) * dq dx vanishes by tangency; the outer integral
        // accumulates whatever quadrature noise remains.
        theta_terms[it] = vg.values()[it] * spi0[it] * inner(psi_f, dq);
    }
    return quadrature_sum(f0.theta_domain, theta_terms);
}

}  // namespace frao
