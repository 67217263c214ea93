#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "frao/srt.hpp"

namespace frao {

// Likelihood tabulated on an observation grid for every node of a parameter
// grid; slice i_theta occupies values[i_theta * nx .. ). Used by the metric
// property checks, which need explicit double quadrature over (x, theta).
struct LikelihoodSlices {
    DomainSpec x_domain;
    DomainSpec theta_domain;
    std::vector<double> values;

    static LikelihoodSlices tabulate(const DomainSpec& x_domain, const DomainSpec& theta_domain,
                                     const std::function<double(double, double)>& f_x_given_theta);
    // Every theta-slice must integrate to 1 in x within tol.
    void validate_normalized(double tol = 1e-6) const;
    std::span<const double> slice(std::size_t i_theta) const;
};

struct ContaminationEntry {
    std::string id;
    double eps;
    GridDensity density;
};

enum class ContaminationMode { Geometric, Linear };

std::string to_string(ContaminationMode m);
ContaminationMode contamination_mode_from_string(const std::string& s);

// Baseline prior, a finite family of contaminants, and an epsilon grid.
struct ContaminationClass {
    GridDensity baseline;
    std::vector<std::pair<std::string, GridDensity>> contaminants;
    std::vector<double> epsilons;
    ContaminationMode mode = ContaminationMode::Geometric;

    void validate() const;
    std::size_t entry_count() const { return contaminants.size() * epsilons.size(); }
};

// v_g: inverse exponential map of sqrt(g) at sqrt(baseline); its norm is the
// Fisher-Rao distance from the baseline to the contaminant.
TangentVector perturbation_vector(const GridDensity& baseline, const GridDensity& g);

// Moves distance eps * d(baseline, g) along the geodesic toward g.
GridDensity contaminate(const GridDensity& baseline, const GridDensity& g, double eps);

// Mixture (1-eps) baseline + eps g.
GridDensity contaminate_linear(const GridDensity& baseline, const GridDensity& g, double eps);

GridDensity contaminated_prior(const ContaminationClass& cls, const GridDensity& g, double eps);

// Materializes the contaminant x epsilon product in grid order.
std::vector<ContaminationEntry> enumerate_class(const ContaminationClass& cls);

// Lazy traversal in the same deterministic order.
void for_each_entry(const ContaminationClass& cls,
                    const std::function<void(const std::string&, double, const GridDensity&)>& fn);

// Both sides of the prior/joint isometry: the perturbation inner product
// computed on the joint-density space by double quadrature, and the same
// inner product on the prior space. They agree for any normalized likelihood.
std::pair<double, double> joint_isometry_check(const GridDensity& pi0, const GridDensity& g1,
                                               const GridDensity& g2, const LikelihoodSlices& f);

// Joint-space inner product of a prior perturbation (toward g) with a
// likelihood perturbation (toward q); vanishes by slice-wise tangency.
double prior_likelihood_orthogonality_check(const LikelihoodSlices& f0, const GridDensity& pi0,
                                            const LikelihoodSlices& q, const GridDensity& g);

}  // namespace frao
