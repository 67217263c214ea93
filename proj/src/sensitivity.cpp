#include "frao/sensitivity.hpp"

#include <algorithm>
#include <cmath>

#include "frao/parallel.hpp"

namespace frao {

namespace {

// Shift-invariant moments shared by the Prop.-1 measures. With
// ft = exp(loglik - shift):
//   s_pi  = int ft pi0          (m(x|pi0) up to the shift factor)
//   s_v   = int ft sqrt(pi0) v  (m~ up to the same factor)
// Ratios of these are exact regardless of the shift.
struct ShiftedMoments {
    double s_pi = 0.0;
    double s_v = 0.0;
};

ShiftedMoments moments(const LikelihoodGrid& lg, const GridDensity& pi0,
                       const TangentVector& v) {
    SrtDensity spi = to_srt(pi0);
    double drift = 0.0;
    for (std::size_t i = 0; i < spi.size(); ++i)
        drift = std::max(drift, std::abs(spi[i] - v.base()[i]));
    if (drift > 1e-9) throw Error("local measure: tangent vector is not based at sqrt(prior)");
    std::vector<double> t1(lg.shifted.size()), t2(lg.shifted.size());
    for (std::size_t i = 0; i < t1.size(); ++i) {
        t1[i] = lg.shifted[i] * pi0[i];
        t2[i] = lg.shifted[i] * spi[i] * v.values()[i];
    }
    return {quadrature_sum(lg.domain, t1), quadrature_sum(lg.domain, t2)};
}

}  // namespace

std::pair<double, std::string> SensitivitySurface::row_max(std::size_t i_eps) const {
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < contaminant_ids.size(); ++j) {
        double v = at(i_eps, j);
        if (v > best) {
            best = v;
            arg = j;
        }
    }
    return {best, contaminant_ids[arg]};
}

std::pair<double, std::string> global_sensitivity(const BayesModel& model,
                                                  const ContaminationClass& cls, double eps,
                                                  Diagnostics* diag) {
    cls.validate();
    bool on_grid = false;
    for (double e : cls.epsilons)
        if (std::abs(e - eps) <= 1e-12) on_grid = true;
    if (!on_grid) throw Error("global_sensitivity: epsilon is not in the class grid");

    LikelihoodGrid lg = LikelihoodGrid::tabulate(model);
    Posterior base = posterior_with_prior(lg, cls.baseline);
    double best = -1.0;
    std::string arg;
    for (const auto& [id, g] : cls.contaminants) {
        Posterior pg = posterior_with_prior(lg, contaminated_prior(cls, g, eps));
        double d = fr_distance(base.density, pg.density, diag);
        if (d > best) {
            best = d;
            arg = id;
        }
    }
    return {best, arg};
}

SensitivitySurface sensitivity_surface(const BayesModel& model, const ContaminationClass& cls,
                                       int threads, Diagnostics* diag) {
    cls.validate();
    LikelihoodGrid lg = LikelihoodGrid::tabulate(model, threads);
    Posterior base = posterior_with_prior(lg, cls.baseline);

    SensitivitySurface surf;
    surf.epsilons = cls.epsilons;
    surf.contaminant_ids.reserve(cls.contaminants.size());
    for (const auto& [id, g] : cls.contaminants) surf.contaminant_ids.push_back(id);

    const std::size_t ne = cls.epsilons.size();
    const std::size_t ng = cls.contaminants.size();
    surf.distances.assign(ne * ng, 0.0);
    std::mutex diag_mu;

    // Cells are independent; precompute each contaminant's tangent once per
    // worker span to avoid recomputing the log map for every epsilon.
    parallel_for(ng, threads, [&](std::size_t lo, std::size_t hi) {
        Diagnostics local;
        for (std::size_t j = lo; j < hi; ++j) {
            const GridDensity& g = cls.contaminants[j].second;
            if (cls.mode == ContaminationMode::Geometric) {
                TangentVector v = perturbation_vector(cls.baseline, g);
                for (std::size_t i = 0; i < ne; ++i) {
                    double eps = cls.epsilons[i];
                    GridDensity prior =
                        eps == 0.0 ? cls.baseline : from_srt(exp_map(v.scaled(eps)));
                    Posterior pg = posterior_with_prior(lg, prior);
                    surf.distances[i * ng + j] = fr_distance(base.density, pg.density, &local);
                }
            } else {
                for (std::size_t i = 0; i < ne; ++i) {
                    Posterior pg = posterior_with_prior(
                        lg, contaminate_linear(cls.baseline, g, cls.epsilons[i]));
                    surf.distances[i * ng + j] = fr_distance(base.density, pg.density, &local);
                }
            }
        }
        if (diag) {
            std::lock_guard<std::mutex> g(diag_mu);
            diag->merge(local);
        }
    });
    return surf;
}

std::vector<std::pair<double, double>> likelihood_sensitivity_curve(
    const std::function<BayesModel(double)>& model_family, std::span<const double> param_grid,
    double baseline_param, int threads) {
    if (param_grid.empty()) throw Error("likelihood_sensitivity_curve: empty grid");
    double lo = *std::min_element(param_grid.begin(), param_grid.end());
    double hi = *std::max_element(param_grid.begin(), param_grid.end());
    if (baseline_param < lo - 1e-12 || baseline_param > hi + 1e-12)
        throw Error("likelihood_sensitivity_curve: baseline parameter outside the grid");
    std::size_t snap = 0;
    for (std::size_t i = 1; i < param_grid.size(); ++i)
        if (std::abs(param_grid[i] - baseline_param) <
            std::abs(param_grid[snap] - baseline_param))
            snap = i;

    std::vector<Posterior> posts(param_grid.size());
    parallel_for(param_grid.size(), threads, [&](std::size_t a, std::size_t b) {
        for (std::size_t i = a; i < b; ++i) posts[i] = posterior(model_family(param_grid[i]));
    });
    std::vector<std::pair<double, double>> curve(param_grid.size());
    for (std::size_t i = 0; i < curve.size(); ++i)
        curve[i] = {param_grid[i], fr_distance(posts[snap].density, posts[i].density)};
    return curve;
}

double local_bayes_factor(const BayesModel& model, const GridDensity& pi1,
                          const TangentVector& v) {
    if (!(pi1.domain() == model.param_domain))
        throw Error("local_bayes_factor: candidate prior domain mismatch");
    LikelihoodGrid lg = LikelihoodGrid::tabulate(model);
    ShiftedMoments m = moments(lg, model.prior, v);
    double m1 = quadrature_inner(lg.domain, lg.shifted, pi1.values());
    if (!(m1 > 0.0)) throw Error("local_bayes_factor: candidate marginal underflows");
    return 2.0 * m.s_v / m1;
}

double local_posterior_functional(const BayesModel& model,
                                  const std::function<double(std::span<const double>)>& h,
                                  const TangentVector& v) {
    LikelihoodGrid lg = LikelihoodGrid::tabulate(model);
    ShiftedMoments m = moments(lg, model.prior, v);
    SrtDensity spi = to_srt(model.prior);
    std::vector<double> th(lg.shifted.size()), thp(lg.shifted.size());
    for (std::size_t i = 0; i < th.size(); ++i) {
        auto x = lg.domain.node(i);
        double hx = h(std::span<const double>(x.data(), lg.domain.dims));
        th[i] = hx * lg.shifted[i] * spi[i] * v.values()[i];
        thp[i] = hx * lg.shifted[i] * model.prior[i];
    }
    double num = quadrature_sum(lg.domain, th);
    double eh = quadrature_sum(lg.domain, thp) / m.s_pi;  // baseline E[h]
    return 2.0 * num / m.s_pi - 2.0 * (m.s_v / m.s_pi) * eh;
}

double local_geodesic_second_order(const BayesModel& model, const TangentVector& v,
                                   Diagnostics* diag) {
    LikelihoodGrid lg = LikelihoodGrid::tabulate(model);
    ShiftedMoments m = moments(lg, model.prior, v);
    // int (v^2 / pi0) p0 dtheta reduces to int v^2 ft / s_pi nodewise; nodes
    // with pi0 = 0 under a nonzero perturbation are excluded and flagged.
    double s_vv = 0.0, excluded = 0.0;
    {
        std::vector<double> t(lg.shifted.size(), 0.0);
        std::vector<double> ex(lg.shifted.size(), 0.0);
        for (std::size_t i = 0; i < t.size(); ++i) {
            double term = v.values()[i] * v.values()[i] * lg.shifted[i];
            if (model.prior[i] > 0.0) {
                t[i] = term;
            } else if (std::abs(v.values()[i]) > 1e-12) {
                ex[i] = term;
                if (diag) ++diag->support_violations;
            }
        }
        s_vv = quadrature_sum(lg.domain, t);
        excluded = quadrature_sum(lg.domain, ex);
    }
    if (excluded > 1e-6 * std::max(s_vv, 1e-300))
        throw Error("local_geodesic_second_order: perturbation mass on zero-prior nodes");
    double r = m.s_v / m.s_pi;  // equals both m~/m0 and int (v/sqrt(pi0)) p0
    return 2.0 * s_vv / m.s_pi - 4.0 * r * r + 2.0 * r * r;
}

}  // namespace frao
