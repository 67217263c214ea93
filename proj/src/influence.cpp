#include "frao/influence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "frao/parallel.hpp"

namespace frao {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// Online log-sum-exp with a running maximum; sequential and deterministic.
struct RunningLse {
    double m = neg_inf;
    double s = 0.0;

    void add(double t) {
        if (t == neg_inf) return;
        if (t <= m) {
            s += std::exp(t - m);
        } else {
            s = s * std::exp(m - t) + 1.0;
            m = t;
        }
    }
    double value() const { return m == neg_inf ? neg_inf : m + std::log(s); }
};

double clamped_arccos(double ip, bool* clamped, Diagnostics* diag) {
    if (clamped) *clamped = false;
    if (ip > 1.0) {
        // MC noise lands slightly above 1 routinely; flag only past 1e-4.
        record_clamp(diag, ip, 1e-4);
        if (clamped && ip > 1.0 + 1e-4) *clamped = true;
        ip = 1.0;
    } else if (ip < 0.0) {
        ip = 0.0;
    }
    return std::acos(ip);
}

// Prop.-2 estimate over the first `upto` draws (log-space accumulation),
// recording prefix values at the requested checkpoints.
double mc_estimate(const BayesModel& model, std::size_t k, const SampleSet& samples,
                   std::span<const std::size_t> checkpoints,
                   std::vector<std::pair<std::size_t, double>>* trace, bool* clamped,
                   Diagnostics* diag) {
    const std::size_t n = samples.size();
    if (n == 0) throw Error("influence_mc: empty sample set");
    const bool weighted = !samples.weights.empty();
    auto row = model.data.row(k);

    RunningLse lse_a, lse_b, lse_w;
    double estimate = 0.0;
    std::size_t next_cp = 0;
    auto current = [&](bool* cl) {
        double lw = weighted ? lse_w.value() : std::log(static_cast<double>(
                                                   std::max<std::size_t>(1, lse_count)));
        (void)lw;
        return 0.0;  // replaced below
    };
    (void)current;

    std::size_t count = 0;
    auto value_now = [&]() {
        double log_n = weighted ? lse_w.value() : std::log(static_cast<double>(count));
        double la = lse_a.value() - log_n;
        double lb = lse_b.value() - log_n;
        return std::exp(la - 0.5 * lb);
    };

    for (std::size_t i = 0; i < n; ++i) {
        double ll = model.case_loglik(row, samples.draw(i));
        if (!std::isfinite(ll))
            throw Error("influence_mc: case log likelihood underflows at draw " +
                        std::to_string(i));
        double lw = weighted ? std::log(samples.weights[i]) : 0.0;
        lse_a.add(lw - 0.5 * ll);
        lse_b.add(lw - ll);
        if (weighted) lse_w.add(lw);
        ++count;
        if (trace && next_cp < checkpoints.size() && count == checkpoints[next_cp]) {
            bool cl = false;
            trace->push_back({count, clamped_arccos(value_now(), &cl, nullptr)});
            ++next_cp;
        }
    }
    estimate = clamped_arccos(value_now(), clamped, diag);
    if (trace && (trace->empty() || trace->back().first != count))
        trace->push_back({count, estimate});
    return estimate;
}

double is_estimate(const EvaluablePosterior& p0, const EvaluablePosterior& pk,
                   const SampleSet& samples, std::span<const std::size_t> checkpoints,
                   std::vector<std::pair<std::size_t, double>>* trace, bool* clamped,
                   Diagnostics* diag) {
    const std::size_t n = samples.size();
    if (n == 0) throw Error("influence_is: empty sample set");
    if (p0.dims != samples.dims || pk.dims != samples.dims)
        throw Error("influence_is: dimension mismatch");
    const bool weighted = !samples.weights.empty();
    double acc = 0.0, wacc = 0.0;
    std::size_t next_cp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto th = samples.draw(i);
        double lr = 0.5 * (pk.log_pdf(th) - p0.log_pdf(th));
        double w = weighted ? samples.weights[i] : 1.0;
        acc += w * std::exp(lr);
        wacc += w;
        if (trace && next_cp < checkpoints.size() && i + 1 == checkpoints[next_cp]) {
            bool cl = false;
            trace->push_back({i + 1, clamped_arccos(acc / wacc, &cl, nullptr)});
            ++next_cp;
        }
    }
    double est = clamped_arccos(acc / wacc, clamped, diag);
    if (trace && (trace->empty() || trace->back().first != n))
        trace->push_back({n, est});
    return est;
}

std::vector<std::size_t> default_checkpoints(int n) {
    std::vector<std::size_t> cps;
    if (n >= 100) {
        std::size_t step = static_cast<std::size_t>(n) / 100;
        for (std::size_t c = step; c <= static_cast<std::size_t>(n); c += step) cps.push_back(c);
    } else {
        cps.push_back(static_cast<std::size_t>(n));
    }
    return cps;
}

void finish_report(InfluenceReport& rep, const InfluenceOptions& opts) {
    for (auto& c : rep.per_case) {
        if (c.value >= opts.flag_high)
            c.flag = "highly influential";
        else if (c.value >= opts.flag_possible)
            c.flag = "possibly influential";
    }
    rep.ranking.resize(rep.per_case.size());
    for (std::size_t i = 0; i < rep.ranking.size(); ++i) rep.ranking[i] = i;
    std::stable_sort(rep.ranking.begin(), rep.ranking.end(), [&](std::size_t a, std::size_t b) {
        return rep.per_case[a].value > rep.per_case[b].value;
    });
}

}  // namespace

std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::Exact: return "exact";
        case Estimator::MC: return "mc";
        case Estimator::IS: return "is";
    }
    throw Error("unknown estimator");
}

Estimator estimator_from_string(const std::string& s) {
    if (s == "exact" || s == "Exact") return Estimator::Exact;
    if (s == "mc" || s == "MC") return Estimator::MC;
    if (s == "is" || s == "IS") return Estimator::IS;
    throw Error("unknown estimator '" + s + "'");
}

SampleSet draw_samples(const EvaluablePosterior& p, int n, std::uint64_t seed) {
    if (n <= 0) throw Error("draw_samples: n must be positive");
    SampleSet s;
    s.dims = p.dims;
    s.draws.resize(static_cast<std::size_t>(n) * p.dims);
    Rng rng(seed);
    std::vector<double> buf(p.dims);
    for (int i = 0; i < n; ++i) {
        p.draw(rng, buf);
        std::copy(buf.begin(), buf.end(), s.draws.begin() + static_cast<std::size_t>(i) * p.dims);
    }
    return s;
}

namespace {

// Exact influence with the full-model likelihood grid already tabulated.
double exact_from_grid(const BayesModel& model, const LikelihoodGrid& lg,
                       const GridDensity& p0, std::size_t k, Diagnostics* diag) {
    const DomainSpec& d = lg.domain;
    auto row = model.data.row(k);
    std::vector<double> del(lg.loglik.size());
    double shift = neg_inf;
    for (std::size_t i = 0; i < del.size(); ++i) {
        auto x = d.node(i);
        double t = model.case_loglik(row, std::span<const double>(x.data(), d.dims));
        del[i] = lg.loglik[i] - t;  // log likelihood without case k
        if (del[i] > shift) shift = del[i];
    }
    if (shift == neg_inf)
        throw Error("influence_exact: deleted-case posterior escapes the grid");
    for (std::size_t i = 0; i < del.size(); ++i)
        del[i] = std::exp(del[i] - shift) * model.prior[i];
    GridDensity pk(d, std::move(del));
    bool clamped = false;
    double ip = quadrature_inner(d, [&] {
        std::vector<double> roots(p0.size());
        for (std::size_t i = 0; i < roots.size(); ++i)
            roots[i] = std::sqrt(p0[i] * pk[i]);
        return roots;
    }(), std::vector<double>(p0.size(), 1.0));
    (void)ip;
    return fr_distance(p0, pk, diag), fr_distance(p0, pk, diag);
    (void)clamped;
}

}  // namespace

double influence_exact(const BayesModel& model, std::size_t k, Diagnostics* diag) {
    model.validate();
    if (k >= model.data.rows()) throw Error("influence_exact: case index out of range");
    LikelihoodGrid lg = LikelihoodGrid::tabulate(model);
    Posterior p0 = posterior_with_prior(lg, model.prior);
    return exact_from_grid(model, lg, p0.density, k, diag);
}

double influence_mc(const BayesModel& model, std::size_t k, const SampleSet& samples,
                    Diagnostics* diag) {
    model.validate();
    if (k >= model.data.rows()) throw Error("influence_mc: case index out of range");
    return mc_estimate(model, k, samples, {}, nullptr, nullptr, diag);
}

double influence_is(const EvaluablePosterior& p0, const EvaluablePosterior& pk,
                    const SampleSet& samples, Diagnostics* diag) {
    return is_estimate(p0, pk, samples, {}, nullptr, nullptr, diag);
}

InfluenceReport influence_all(const BayesModel& model, Estimator estimator, int n_samples,
                              std::uint64_t seed, const InfluenceOptions& opts) {
    model.validate();
    if (estimator == Estimator::IS)
        throw Error("influence_all: the IS estimator needs a closed-form posterior family; "
                    "use influence_all_is");
    const std::size_t n_cases = model.data.rows();
    InfluenceReport rep;
    rep.per_case.resize(n_cases);

    std::vector<std::size_t> cps =
        opts.checkpoints.empty() ? default_checkpoints(n_samples) : opts.checkpoints;
    auto want_trace = [&](std::size_t k) {
        return std::find(opts.trace_cases.begin(), opts.trace_cases.end(), k) !=
               opts.trace_cases.end();
    };

    std::mutex diag_mu;
    if (estimator == Estimator::Exact) {
        LikelihoodGrid lg = LikelihoodGrid::tabulate(model, opts.threads);
        Posterior p0 = posterior_with_prior(lg, model.prior);
        parallel_for(n_cases, opts.threads, [&](std::size_t lo, std::size_t hi) {
            Diagnostics local;
            for (std::size_t k = lo; k < hi; ++k) {
                double v = exact_from_grid(model, lg, p0.density, k, &local);
                rep.per_case[k] = {k, v, "exact", lg.domain.node_count(), false, ""};
            }
            std::lock_guard<std::mutex> g(diag_mu);
            rep.diagnostics.merge(local);
        });
    } else {
        SampleSet samples = mh_sample(model, n_samples, std::max(1000, n_samples / 10), seed);
        std::map<std::size_t, std::vector<std::pair<std::size_t, double>>> traces;
        for (std::size_t k : opts.trace_cases)
            if (k < n_cases) traces[k] = {};
        parallel_for(n_cases, opts.threads, [&](std::size_t lo, std::size_t hi) {
            Diagnostics local;
            for (std::size_t k = lo; k < hi; ++k) {
                bool clamped = false;
                std::vector<std::pair<std::size_t, double>> trace;
                double v = mc_estimate(model, k, samples, cps,
                                       want_trace(k) ? &trace : nullptr, &clamped, &local);
                rep.per_case[k] = {k, v, "mc", samples.size(), clamped, ""};
                if (want_trace(k)) {
                    std::lock_guard<std::mutex> g(diag_mu);
                    traces[k] = std::move(trace);
                }
            }
            std::lock_guard<std::mutex> g(diag_mu);
            rep.diagnostics.merge(local);
        });
        rep.traces = std::move(traces);
    }
    finish_report(rep, opts);
    return rep;
}

InfluenceReport influence_all_is(const std::function<EvaluablePosterior(int)>& posterior_of,
                                 std::size_t n_cases, int n_samples, std::uint64_t seed,
                                 const InfluenceOptions& opts) {
    EvaluablePosterior p0 = posterior_of(-1);
    SampleSet samples = draw_samples(p0, n_samples, seed);
    std::vector<std::size_t> cps =
        opts.checkpoints.empty() ? default_checkpoints(n_samples) : opts.checkpoints;
    auto want_trace = [&](std::size_t k) {
        return std::find(opts.trace_cases.begin(), opts.trace_cases.end(), k) !=
               opts.trace_cases.end();
    };

    InfluenceReport rep;
    rep.per_case.resize(n_cases);
    std::mutex mu;
    parallel_for(n_cases, opts.threads, [&](std::size_t lo, std::size_t hi) {
        Diagnostics local;
        for (std::size_t k = lo; k < hi; ++k) {
            EvaluablePosterior pk = posterior_of(static_cast<int>(k));
            bool clamped = false;
            std::vector<std::pair<std::size_t, double>> trace;
            double v = is_estimate(p0, pk, samples, cps, want_trace(k) ? &trace : nullptr,
                                   &clamped, &local);
            rep.per_case[k] = {k, v, "is", samples.size(), clamped, ""};
            if (want_trace(k)) {
                std::lock_guard<std::mutex> g(mu);
                rep.traces[k] = std::move(trace);
            }
        }
        std::lock_guard<std::mutex> g(mu);
        rep.diagnostics.merge(local);
    });

    if (opts.variance_replicates > 0) {
        const int reps = opts.variance_replicates;
        std::vector<std::vector<double>> est(reps, std::vector<double>(n_cases));
        parallel_for(reps, opts.threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r) {
                SampleSet rs = draw_samples(p0, n_samples, seed + 1 + r);
                for (std::size_t k = 0; k < n_cases; ++k) {
                    EvaluablePosterior pk = posterior_of(static_cast<int>(k));
                    est[r][k] = is_estimate(p0, pk, rs, {}, nullptr, nullptr, nullptr);
                }
            }
        });
        for (std::size_t k = 0; k < n_cases; ++k) {
            double mean = 0.0;
            for (int r = 0; r < reps; ++r) mean += est[r][k];
            mean /= reps;
            double var = 0.0;
            for (int r = 0; r < reps; ++r) var += (est[r][k] - mean) * (est[r][k] - mean);
            rep.variance[k] = reps > 1 ? var / (reps - 1) : 0.0;
        }
    }
    finish_report(rep, opts);
    return rep;
}

std::vector<std::pair<std::size_t, double>> convergence_trace(
    const BayesModel& model, std::size_t k, int max_n, std::span<const std::size_t> checkpoints,
    std::uint64_t seed) {
    model.validate();
    if (k >= model.data.rows()) throw Error("convergence_trace: case index out of range");
    SampleSet samples = mh_sample(model, max_n, 1000, seed);
    std::vector<std::size_t> cps(checkpoints.begin(), checkpoints.end());
    if (cps.empty()) cps = default_checkpoints(max_n);
    std::vector<std::pair<std::size_t, double>> trace;
    mc_estimate(model, k, samples, cps, &trace, nullptr, nullptr);
    return trace;
}

}  // namespace frao
