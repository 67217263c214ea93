#pragma once

#include <string>
#include <utility>
#include <vector>

#include "frao/bayes.hpp"
#include "frao/contamination.hpp"

namespace frao {

struct SensitivityEntry {
    std::string contaminant;
    double eps = 0.0;       // epsilon for global entries, derivative order for local
    std::string measure;    // "fr_distance", "bayes_factor", "posterior_functional", ...
    double value = 0.0;
};

struct SensitivityReport {
    enum class Mode { Global, Local } mode = Mode::Global;
    std::vector<SensitivityEntry> entries;
    double baseline_posterior_mean = 0.0;
    double baseline_log_marginal = 0.0;
    Diagnostics diagnostics;
};

// Def.-3 style global measure: the largest Fisher-Rao distance between the
// baseline posterior and the posteriors under the contaminated priors at a
// fixed epsilon, with the maximizing contaminant id.
std::pair<double, std::string> global_sensitivity(const BayesModel& model,
                                                  const ContaminationClass& cls, double eps,
                                                  Diagnostics* diag = nullptr);

struct SensitivitySurface {
    std::vector<double> epsilons;
    std::vector<std::string> contaminant_ids;
    std::vector<double> distances;  // row-major [i_eps][j_contaminant]

    double at(std::size_t i_eps, std::size_t j) const {
        return distances[i_eps * contaminant_ids.size() + j];
    }
    std::pair<double, std::string> row_max(std::size_t i_eps) const;
};

SensitivitySurface sensitivity_surface(const BayesModel& model, const ContaminationClass& cls,
                                       int threads = 0, Diagnostics* diag = nullptr);

// Fisher-Rao distance from the baseline posterior as one likelihood
// parameter moves over a grid. The baseline parameter snaps to the nearest
// grid value, so the curve is exactly zero there.
std::vector<std::pair<double, double>> likelihood_sensitivity_curve(
    const std::function<BayesModel(double)>& model_family, std::span<const double> param_grid,
    double baseline_param, int threads = 0);

// First directional derivative at eps = 0 of the Bayes factor
// m(x|eps g) / m(x|pi1): equals 2 m~(x|v) / m(x|pi1).
double local_bayes_factor(const BayesModel& model, const GridDensity& pi1,
                          const TangentVector& v);

// First directional derivative of the posterior expectation of h.
double local_posterior_functional(const BayesModel& model,
                                  const std::function<double(std::span<const double>)>& h,
                                  const TangentVector& v);

// Second directional derivative at eps = 0 of the squared posterior
// distance: 2 int v^2/pi0 p0 - 4 (m~/m0) int v/sqrt(pi0) p0 + 2 (m~/m0)^2,
// which is nonnegative. Nodes where the prior vanishes under a nonzero
// perturbation are excluded from the quadrature and flagged.
double local_geodesic_second_order(const BayesModel& model, const TangentVector& v,
                                   Diagnostics* diag = nullptr);

}  // namespace frao
