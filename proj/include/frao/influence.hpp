#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "frao/bayes.hpp"

namespace frao {

// A posterior with a normalized log density and a sampler; what the
// importance-sampling estimator needs (conjugate families provide these).
struct EvaluablePosterior {
    int dims = 0;
    std::function<double(std::span<const double>)> log_pdf;
    std::function<void(Rng&, std::span<double>)> draw;
};

SampleSet draw_samples(const EvaluablePosterior& p, int n, std::uint64_t seed);

// Case-deletion influence by grid quadrature: the Fisher-Rao distance
// between the full posterior and the posterior without case k.
double influence_exact(const BayesModel& model, std::size_t k, Diagnostics* diag = nullptr);

// Monte-Carlo estimator from baseline-posterior draws, for iid likelihoods:
//   a_i = f(x_k|theta_i)^(-1/2),  b = [mean_i 1/f(x_k|theta_i)]^(-1/2),
//   I_hat = arccos(b * mean_i a_i),
// accumulated in log space.
double influence_mc(const BayesModel& model, std::size_t k, const SampleSet& samples,
                    Diagnostics* diag = nullptr);

// Importance-sampling estimator arccos[mean_i sqrt(pk/p0)] with draws from p0.
double influence_is(const EvaluablePosterior& p0, const EvaluablePosterior& pk,
                    const SampleSet& samples, Diagnostics* diag = nullptr);

enum class Estimator { Exact, MC, IS };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& s);

struct InfluenceOptions {
    std::vector<std::size_t> trace_cases;     // per-case estimate-vs-N curves
    std::vector<std::size_t> checkpoints;     // default: 1k,2k,...,N
    int variance_replicates = 0;              // fresh sample sets per replicate
    double flag_possible = 0.3;               // report annotations, configurable
    double flag_high = 0.7;
    int threads = 0;
};

struct InfluenceCase {
    std::size_t index = 0;
    double value = 0.0;
    std::string estimator;
    std::size_t samples = 0;
    bool clamped = false;
    std::string flag;  // "", "possibly influential", "highly influential"
};

struct InfluenceReport {
    std::vector<InfluenceCase> per_case;
    std::vector<std::size_t> ranking;  // case indices, descending influence
    std::map<std::size_t, std::vector<std::pair<std::size_t, double>>> traces;
    std::map<std::size_t, double> variance;  // per-case variance over replicates
    Diagnostics diagnostics;
};

// One shared baseline sample is drawn (MC) and reused for every case.
InfluenceReport influence_all(const BayesModel& model, Estimator estimator, int n_samples,
                              std::uint64_t seed, const InfluenceOptions& opts = {});

// IS variant over a closed-form posterior family: posterior_of(-1) is the
// baseline, posterior_of(k) the posterior with case k deleted.
InfluenceReport influence_all_is(const std::function<EvaluablePosterior(int)>& posterior_of,
                                 std::size_t n_cases, int n_samples, std::uint64_t seed,
                                 const InfluenceOptions& opts = {});

// Prefix-consistent MC estimates: the value at checkpoint N uses the first
// N draws of one chain drawn with `seed`.
std::vector<std::pair<std::size_t, double>> convergence_trace(
    const BayesModel& model, std::size_t k, int max_n, std::span<const std::size_t> checkpoints,
    std::uint64_t seed);

}  // namespace frao
