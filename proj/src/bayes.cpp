#include "frao/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "frao/csv.hpp"
#include "frao/parallel.hpp"

namespace frao {

namespace {
constexpr double neg_inf = -std::numeric_limits<double>::infinity();
}

std::size_t Dataset::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw Error("dataset: no column named '" + name + "'");
}

Dataset Dataset::without_row(std::size_t k) const {
    if (k >= rows()) throw Error("dataset: row index out of range");
    Dataset out;
    out.columns = columns;
    out.cells.reserve(cells.size() - columns.size());
    for (std::size_t r = 0; r < rows(); ++r) {
        if (r == k) continue;
        auto rr = row(r);
        out.cells.insert(out.cells.end(), rr.begin(), rr.end());
    }
    return out;
}

void Dataset::append_row(std::span<const double> values) {
    if (values.size() != columns.size()) throw Error("dataset: row width mismatch");
    cells.insert(cells.end(), values.begin(), values.end());
}

Dataset Dataset::load_csv(const std::string& path) {
    auto rows = read_csv_rows(path);
    if (rows.size() < 2) throw Error("dataset csv needs a header and data: " + path);
    Dataset d;
    d.columns = rows[0];
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != d.columns.size())
            throw Error("dataset csv: ragged row " + std::to_string(r) + " in " + path);
        for (const auto& cell : rows[r]) d.cells.push_back(std::stod(cell));
    }
    return d;
}

void BayesModel::validate() const {
    param_domain.validate();
    if (!(prior.domain() == param_domain))
        throw Error("bayes model: prior domain differs from parameter domain");
    if (!case_loglik) throw Error("bayes model: missing likelihood");
    if (data.rows() == 0) throw Error("bayes model: empty dataset");
}

double BayesModel::total_loglik(std::span<const double> theta) const {
    double acc = 0.0;
    for (std::size_t r = 0; r < data.rows(); ++r) acc += case_loglik(data.row(r), theta);
    return acc;
}

BayesModel BayesModel::with_prior(GridDensity new_prior) const {
    BayesModel m = *this;
    m.prior = std::move(new_prior);
    return m;
}

BayesModel BayesModel::without_case(std::size_t k) const {
    BayesModel m = *this;
    m.data = data.without_row(k);
    return m;
}

LikelihoodGrid LikelihoodGrid::tabulate(const BayesModel& model, int threads) {
    model.validate();
    LikelihoodGrid lg;
    lg.domain = model.param_domain;
    const std::size_t n = lg.domain.node_count();
    lg.loglik.resize(n);
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            auto x = lg.domain.node(i);
            lg.loglik[i] =
                model.total_loglik(std::span<const double>(x.data(), lg.domain.dims));
        }
    });
    lg.shift = neg_inf;
    for (double v : lg.loglik) {
        if (std::isnan(v)) throw Error("likelihood grid: NaN log likelihood");
        if (v == neg_inf)
            ++lg.neg_inf_nodes;
        else
            lg.shift = std::max(lg.shift, v);
    }
    if (lg.shift == neg_inf)
        throw Error("likelihood grid: log likelihood is -inf on every node "
                    "(posterior mass escapes the grid)");
    lg.shifted.resize(n);
    for (std::size_t i = 0; i < n; ++i) lg.shifted[i] = std::exp(lg.loglik[i] - lg.shift);
    return lg;
}

Posterior posterior_with_prior(const LikelihoodGrid& lg, const GridDensity& prior) {
    if (!(prior.domain() == lg.domain)) throw Error("posterior: prior domain mismatch");
    std::vector<double> unnorm(lg.shifted.size());
    for (std::size_t i = 0; i < unnorm.size(); ++i) unnorm[i] = lg.shifted[i] * prior[i];
    double z = quadrature_sum(lg.domain, unnorm);
    if (!(z > 0.0)) throw Error("posterior: zero marginal mass on the grid");
    Posterior post;
    post.density = GridDensity(lg.domain, std::move(unnorm));
    post.log_marginal = lg.shift + std::log(z);
    post.neg_inf_nodes = lg.neg_inf_nodes;
    return post;
}

Posterior posterior(const BayesModel& model) {
    return posterior_with_prior(LikelihoodGrid::tabulate(model), model.prior);
}

double log_marginal_with_prior(const LikelihoodGrid& lg, const GridDensity& prior) {
    if (!(prior.domain() == lg.domain)) throw Error("marginal: prior domain mismatch");
    double z = quadrature_inner(lg.domain, lg.shifted, prior.values());
    if (!(z > 0.0)) throw Error("marginal: zero mass on the grid");
    return lg.shift + std::log(z);
}

double marginal_contaminated(const BayesModel& model, const GridDensity& pi_eps) {
    return log_marginal_with_prior(LikelihoodGrid::tabulate(model), pi_eps);
}

double tilde_marginal(const BayesModel& model, const TangentVector& v) {
    SrtDensity spi = to_srt(model.prior);
    double drift = 0.0;
    for (std::size_t i = 0; i < spi.size(); ++i)
        drift = std::max(drift, std::abs(spi[i] - v.base()[i]));
    if (drift > 1e-9)
        throw Error("tilde_marginal: tangent vector is not based at sqrt(prior)");
    LikelihoodGrid lg = LikelihoodGrid::tabulate(model);
    std::vector<double> terms(spi.size());
    for (std::size_t i = 0; i < terms.size(); ++i)
        terms[i] = lg.shifted[i] * spi[i] * v.values()[i];
    return std::exp(lg.shift) * quadrature_sum(lg.domain, terms);
}

double expectation(const Posterior& post,
                   const std::function<double(std::span<const double>)>& h) {
    const DomainSpec& d = post.density.domain();
    std::vector<double> terms(post.density.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        auto x = d.node(i);
        terms[i] = h(std::span<const double>(x.data(), d.dims)) * post.density[i];
    }
    return quadrature_sum(d, terms);
}

// ---------------------------------------------------------------------------
// Random-walk Metropolis

namespace {

// Quadrature mean of the prior per axis; circular axes use the circular mean.
std::vector<double> prior_mean(const GridDensity& prior) {
    const DomainSpec& d = prior.domain();
    std::vector<double> mean(d.dims, 0.0);
    if (d.topology == Topology::Circular) {
        std::vector<double> c(prior.size()), s(prior.size());
        for (std::size_t i = 0; i < prior.size(); ++i) {
            double x = d.node(i)[0];
            c[i] = prior[i] * std::cos(x);
            s[i] = prior[i] * std::sin(x);
        }
        double mc = quadrature_sum(d, c), ms = quadrature_sum(d, s);
        double ang = std::atan2(ms, mc);
        double span = d.upper - d.lower;
        ang = std::fmod(ang - d.lower, span);
        if (ang < 0.0) ang += span;
        mean[0] = d.lower + ang;
        return mean;
    }
    for (int a = 0; a < d.dims; ++a) {
        std::vector<double> t(prior.size());
        for (std::size_t i = 0; i < prior.size(); ++i) t[i] = prior[i] * d.node(i)[a];
        mean[a] = quadrature_sum(d, t);
    }
    return mean;
}

}  // namespace

SampleSet mh_sample(const BayesModel& model, int n, int burn_in, std::uint64_t seed,
                    std::optional<double> step, MhInfo* info) {
    model.validate();
    if (n < 100) throw Error("mh_sample: need n >= 100");
    if (burn_in < 0) throw Error("mh_sample: negative burn-in");
    const DomainSpec& d = model.param_domain;
    const int dims = d.dims;
    const bool circular = d.topology == Topology::Circular;
    const double span = d.upper - d.lower;

    auto log_target = [&](std::span<const double> th) {
        double pr = model.prior.evaluate(th);
        if (!(pr > 0.0)) return neg_inf;
        return model.total_loglik(th) + std::log(pr);
    };
    auto in_domain = [&](std::span<const double> th) {
        if (circular) return true;
        for (double x : th)
            if (x < d.lower || x > d.upper) return false;
        return true;
    };

    Rng rng(seed);
    std::vector<double> cur = prior_mean(model.prior);
    double cur_lp = log_target(cur);
    if (cur_lp == neg_inf) throw Error("mh_sample: start point has zero posterior density");

    const bool tune = !step.has_value();
    double log_step = std::log(step.value_or(span / 20.0));
    const double min_log = std::log(span * 1e-8), max_log = std::log(span);

    std::vector<double> prop(dims);
    long long accepted = 0, proposals = 0;
    int tune_batch = 0, batch_acc = 0, batch_size = 0;
    SampleSet out;
    out.dims = dims;
    out.draws.reserve(static_cast<std::size_t>(n) * dims);

    const long long total = static_cast<long long>(burn_in) + n;
    for (long long it = 0; it < total; ++it) {
        double s = std::exp(log_step);
        for (int a = 0; a < dims; ++a) {
            prop[a] = cur[a] + s * rng.normal();
            if (circular) {
                prop[a] = std::fmod(prop[a] - d.lower, span);
                if (prop[a] < 0.0) prop[a] += span;
                prop[a] += d.lower;
            }
        }
        double u = rng.uniform();
        bool accept = false;
        if (in_domain(prop)) {
            double lp = log_target(prop);
            if (lp > neg_inf && std::log(u) < lp - cur_lp) {
                accept = true;
                cur = prop;
                cur_lp = lp;
            }
        }
        bool warm = it < burn_in;
        if (!warm) {
            out.draws.insert(out.draws.end(), cur.begin(), cur.end());
            ++proposals;
            if (accept) ++accepted;
        } else if (tune) {
            batch_acc += accept ? 1 : 0;
            if (++batch_size == 100) {
                ++tune_batch;
                double rate = batch_acc / 100.0;
                log_step += (rate - 0.3) / tune_batch;  // Robbins-Monro on log scale
                log_step = std::clamp(log_step, min_log, max_log);
                batch_acc = 0;
                batch_size = 0;
            }
        }
    }
    double rate = proposals > 0 ? static_cast<double>(accepted) / proposals : 0.0;
    if (info) {
        info->acceptance_rate = rate;
        info->step = std::exp(log_step);
    }
    if (rate < 0.01)
        throw Error("mh_sample: acceptance rate " + std::to_string(rate) +
                    " after tuning; model or step is pathological");
    return out;
}

// ---------------------------------------------------------------------------
// Laplace-style grid placement

DomainSpec laplace_bounds(const std::function<double(std::span<const double>)>& log_target,
                          std::span<const double> start, double half_width_sds, int points) {
    const int dims = static_cast<int>(start.size());
    if (dims < 1 || dims > 3) throw Error("laplace_bounds: dims must be 1..3");
    std::vector<double> x(start.begin(), start.end());
    double fx = log_target(x);
    if (!std::isfinite(fx)) throw Error("laplace_bounds: start point has -inf target");

    // Coordinate ascent, per-axis line search by bracket expansion + bisection.
    for (int sweep = 0; sweep < 200; ++sweep) {
        double moved = 0.0;
        for (int a = 0; a < dims; ++a) {
            double h = std::max(0.5, 1e-3 * std::abs(x[a]));
            for (int iter = 0; iter < 80; ++iter) {
                std::vector<double> xp = x, xm = x;
                xp[a] += h;
                xm[a] -= h;
                double fp = log_target(xp), fm = log_target(xm);
                if (fp > fx && fp >= fm) {
                    x = xp;
                    fx = fp;
                    moved += h;
                    h *= 2.0;
                } else if (fm > fx) {
                    x = xm;
                    fx = fm;
                    moved += h;
                    h *= 2.0;
                } else {
                    h *= 0.5;
                    if (h < 1e-10 * std::max(1.0, std::abs(x[a]))) break;
                }
                if (std::abs(x[a]) > 1e8) throw Error("laplace_bounds: optimizer diverged");
            }
        }
        if (moved < 1e-9) break;
    }

    double lo = 1e300, hi = -1e300;
    for (int a = 0; a < dims; ++a) {
        double h = std::max(1e-4, 1e-4 * std::abs(x[a]));
        std::vector<double> xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        double curv = -(log_target(xp) - 2.0 * fx + log_target(xm)) / (h * h);
        if (!(curv > 0.0)) throw Error("laplace_bounds: non-positive curvature at the MAP");
        double sd = 1.0 / std::sqrt(curv);
        lo = std::min(lo, x[a] - half_width_sds * sd);
        hi = std::max(hi, x[a] + half_width_sds * sd);
    }
    DomainSpec d{Topology::Linear, lo, hi, points > 0 ? points : default_points_per_axis(dims),
                 dims};
    d.validate();
    return d;
}

DomainSpec laplace_bounds(const BayesModel& model, double half_width_sds, int points) {
    model.validate();
    if (model.param_domain.topology == Topology::Circular)
        throw Error("laplace_bounds: circular parameters need no grid placement");
    auto target = [&](std::span<const double> th) {
        if (!th.empty()) {
            for (int a = 0; a < model.param_domain.dims; ++a)
                if (th[a] < model.param_domain.lower || th[a] > model.param_domain.upper)
                    return neg_inf;
        }
        double pr = model.prior.evaluate(th);
        if (!(pr > 0.0)) return neg_inf;
        return model.total_loglik(th) + std::log(pr);
    };
    std::vector<double> start = prior_mean(model.prior);
    return laplace_bounds(target, start, half_width_sds, points);
}

}  // namespace frao
