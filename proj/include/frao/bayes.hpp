#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frao/grid_density.hpp"
#include "frao/rng.hpp"
#include "frao/srt.hpp"

namespace frao {

struct Dataset {
    std::vector<std::string> columns;
    std::vector<double> cells;  // row-major

    std::size_t rows() const { return columns.empty() ? 0 : cells.size() / columns.size(); }
    std::span<const double> row(std::size_t i) const {
        return {cells.data() + i * columns.size(), columns.size()};
    }
    std::size_t column_index(const std::string& name) const;
    Dataset without_row(std::size_t k) const;
    void append_row(std::span<const double> values);

    static Dataset load_csv(const std::string& path);
};

// Per-observation log likelihood; the model total is the sum over rows.
using CaseLogLik =
    std::function<double(std::span<const double> row, std::span<const double> theta)>;

struct BayesModel {
    DomainSpec param_domain;
    GridDensity prior;
    Dataset data;
    CaseLogLik case_loglik;

    void validate() const;
    double total_loglik(std::span<const double> theta) const;
    BayesModel with_prior(GridDensity new_prior) const;
    BayesModel without_case(std::size_t k) const;
};

struct Posterior {
    GridDensity density;
    double log_marginal = 0.0;
    int neg_inf_nodes = 0;  // grid nodes where the log likelihood was -inf
};

// Total log likelihood tabulated over the parameter grid, cached in both
// log form and max-shifted linear form so several priors can reuse it.
struct LikelihoodGrid {
    DomainSpec domain;
    std::vector<double> loglik;
    std::vector<double> shifted;  // exp(loglik - shift)
    double shift = 0.0;
    int neg_inf_nodes = 0;

    static LikelihoodGrid tabulate(const BayesModel& model, int threads = 0);
};

Posterior posterior(const BayesModel& model);
Posterior posterior_with_prior(const LikelihoodGrid& lg, const GridDensity& prior);

// log m(x | pi_eps): log marginal under a replacement prior.
double marginal_contaminated(const BayesModel& model, const GridDensity& pi_eps);
double log_marginal_with_prior(const LikelihoodGrid& lg, const GridDensity& prior);

// m~(x|v) = int f(x|theta) sqrt(pi0) v dtheta, signed, linear scale.
double tilde_marginal(const BayesModel& model, const TangentVector& v);

double expectation(const Posterior& post,
                   const std::function<double(std::span<const double>)>& h);

struct MhInfo {
    double acceptance_rate = 0.0;
    double step = 0.0;
};

// Gaussian random-walk Metropolis over the model's parameter space.
// Deterministic for a fixed seed. Without an explicit step the proposal
// scale is tuned during burn-in toward 30% acceptance and then frozen.
SampleSet mh_sample(const BayesModel& model, int n, int burn_in, std::uint64_t seed,
                    std::optional<double> step = std::nullopt, MhInfo* info = nullptr);

// Grid placement: maximize the log target by coordinate ascent, take
// curvature from second differences, and return MAP +- half_width_sds
// standard deviations per axis (hull across axes).
DomainSpec laplace_bounds(const std::function<double(std::span<const double>)>& log_target,
                          std::span<const double> start, double half_width_sds = 6.0,
                          int points = 0);
DomainSpec laplace_bounds(const BayesModel& model, double half_width_sds = 6.0, int points = 0);

}  // namespace frao
