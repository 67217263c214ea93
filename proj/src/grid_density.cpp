#include "frao/grid_density.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "frao/csv.hpp"

namespace frao {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double std_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(two_pi);
}

double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

// Asymmetric Laplace with mode 0, concentration lambda, skewness eta.
double asym_laplace(double u, double lambda, double eta) {
    double c = lambda / (eta + 1.0 / eta);
    return u >= 0.0 ? c * std::exp(-lambda * eta * u) : c * std::exp(lambda * u / eta);
}

struct Chol3 {
    // Lower-triangular factor of a d x d SPD matrix, d <= 3.
    int d;
    double L[3][3] = {};
    double log_det = 0.0;  // log det(Sigma)

    static Chol3 factor(int d, const double* sigma /* row-major d*d */) {
        Chol3 c;
        c.d = d;
        double a[3][3];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) a[i][j] = sigma[i * d + j];
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = a[i][j];
                for (int k = 0; k < j; ++k) s -= c.L[i][k] * c.L[j][k];
                if (i == j) {
                    if (s <= 0.0) throw Error("covariance matrix is not positive definite");
                    c.L[i][i] = std::sqrt(s);
                    c.log_det += 2.0 * std::log(c.L[i][i]);
                } else {
                    c.L[i][j] = s / c.L[j][j];
                }
            }
        }
        return c;
    }

    // Solve L y = x, return |y|^2 = x' Sigma^{-1} x.
    double mahalanobis2(const double* x) const {
        double y[3];
        for (int i = 0; i < d; ++i) {
            double s = x[i];
            for (int k = 0; k < i; ++k) s -= L[i][k] * y[k];
            y[i] = s / L[i][i];
        }
        double q = 0.0;
        for (int i = 0; i < d; ++i) q += y[i] * y[i];
        return q;
    }
};

void require(bool cond, const char* msg) {
    if (!cond) throw Error(msg);
}

}  // namespace

GridDensity::GridDensity(DomainSpec domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
    domain_.validate();
    if (values_.size() != domain_.node_count())
        throw Error("grid density: value count does not match grid");
    for (double v : values_) {
        if (!std::isfinite(v)) throw Error("grid density: non-finite value");
        if (v < 0.0) throw Error("grid density: negative value");
    }
    double total = quadrature_sum(domain_, values_);
    if (!(total > 0.0) || !std::isfinite(total))
        throw Error("grid density: total mass is not positive");
    double inv = 1.0 / total;
    for (double& v : values_) v *= inv;
}

double integrate(const GridDensity& p) {
    return quadrature_sum(p.domain(), p.values());
}

double GridDensity::evaluate(std::span<const double> x) const {
    const DomainSpec& d = domain_;
    if (static_cast<int>(x.size()) != d.dims)
        throw Error("evaluate: point dimension mismatch");
    const int m = d.points_per_axis;
    const double h = d.spacing();
    int base[3] = {0, 0, 0};
    int next[3] = {0, 0, 0};
    double frac[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < d.dims; ++a) {
        double xa = x[a];
        if (d.topology == Topology::Circular) {
            double span = d.upper - d.lower;
            xa = std::fmod(xa - d.lower, span);
            if (xa < 0.0) xa += span;
            double t = xa / h;
            int i0 = static_cast<int>(std::floor(t));
            if (i0 >= m) i0 = m - 1;
            base[a] = i0;
            next[a] = (i0 + 1) % m;
            frac[a] = t - i0;
        } else {
            double tol = h * 1e-9;
            if (xa < d.lower - tol || xa > d.upper + tol)
                throw Error("evaluate: point outside linear domain");
            double t = (std::clamp(xa, d.lower, d.upper) - d.lower) / h;
            int i0 = static_cast<int>(std::floor(t));
            if (i0 > m - 2) i0 = m - 2;
            base[a] = i0;
            next[a] = i0 + 1;
            frac[a] = t - i0;
        }
    }
    const auto idx = [&](const int* ii) {
        std::size_t flat = 0;
        for (int a = 0; a < d.dims; ++a)
            flat = flat * static_cast<std::size_t>(m) + static_cast<std::size_t>(ii[a]);
        return flat;
    };
    double acc = 0.0;
    int corners = 1 << d.dims;
    for (int c = 0; c < corners; ++c) {
        int ii[3];
        double wgt = 1.0;
        for (int a = 0; a < d.dims; ++a) {
            bool hi = (c >> a) & 1;
            ii[a] = hi ? next[a] : base[a];
            wgt *= hi ? frac[a] : (1.0 - frac[a]);
        }
        if (wgt != 0.0) acc += wgt * values_[idx(ii)];
    }
    return acc;
}

// ---------------------------------------------------------------------------
// SampleSet

void SampleSet::validate() const {
    if (dims < 1 || dims > 3) throw Error("sample set: dims must be 1..3");
    if (draws.empty() || draws.size() % static_cast<std::size_t>(dims) != 0)
        throw Error("sample set: empty or ragged draws");
    if (!weights.empty()) {
        if (weights.size() != size()) throw Error("sample set: weight count mismatch");
        double s = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw Error("sample set: negative weight");
            s += w;
        }
        if (std::abs(s - 1.0) > 1e-8) throw Error("sample set: weights must sum to 1");
    }
}

SampleSet SampleSet::prefix(std::size_t n) const {
    SampleSet out;
    out.dims = dims;
    n = std::min(n, size());
    out.draws.assign(draws.begin(), draws.begin() + n * static_cast<std::size_t>(dims));
    if (!weights.empty()) {
        out.weights.assign(weights.begin(), weights.begin() + n);
        double s = 0.0;
        for (double w : out.weights) s += w;
        for (double& w : out.weights) w /= s;
    }
    return out;
}

SampleSet SampleSet::load_csv(const std::string& path) {
    auto rows = read_csv_rows(path);
    if (rows.empty()) throw Error("sample csv is empty: " + path);
    std::size_t start = 0;
    // Tolerate a header row of column names.
    try {
        (void)std::stod(rows[0][0]);
    } catch (...) {
        start = 1;
    }
    if (start >= rows.size()) throw Error("sample csv has no data rows: " + path);
    SampleSet s;
    s.dims = static_cast<int>(rows[start].size());
    for (std::size_t r = start; r < rows.size(); ++r) {
        if (static_cast<int>(rows[r].size()) != s.dims)
            throw Error("sample csv: ragged row in " + path);
        for (const auto& cell : rows[r]) s.draws.push_back(std::stod(cell));
    }
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Parametric families

std::string to_string(Family f) {
    switch (f) {
        case Family::Normal: return "Normal";
        case Family::SkewNormal: return "SkewNormal";
        case Family::StudentT: return "StudentT";
        case Family::Gamma: return "Gamma";
        case Family::VonMises: return "VonMises";
        case Family::WrappedLaplace: return "WrappedLaplace";
        case Family::MultivariateNormal: return "MultivariateNormal";
    }
    throw Error("unknown family");
}

Family family_from_string(const std::string& s) {
    if (s == "Normal") return Family::Normal;
    if (s == "SkewNormal") return Family::SkewNormal;
    if (s == "StudentT") return Family::StudentT;
    if (s == "Gamma") return Family::Gamma;
    if (s == "VonMises") return Family::VonMises;
    if (s == "WrappedLaplace") return Family::WrappedLaplace;
    if (s == "MultivariateNormal") return Family::MultivariateNormal;
    throw Error("unknown family '" + s + "'");
}

int default_points_per_axis(int dims) {
    switch (dims) {
        case 1: return 2048;
        case 2: return 257;
        default: return 101;
    }
}

namespace {

bool is_circular_family(Family f) {
    return f == Family::VonMises || f == Family::WrappedLaplace;
}

// Closed-form density of a family at a grid node.
struct FamilyPdf {
    Family family;
    std::vector<double> params;
    int dims;
    // cached bits
    double lg_norm = 0.0;      // StudentT log normalizer
    double vm_norm = 0.0;      // VonMises normalizer 2*pi*I0(kappa)
    int wl_wraps = 0;          // WrappedLaplace series half-width
    Chol3 chol{};              // MultivariateNormal
    double mvn_norm = 0.0;

    double operator()(const std::array<double, 3>& x) const {
        switch (family) {
            case Family::Normal: {
                double z = (x[0] - params[0]) / params[1];
                return std_normal_pdf(z) / params[1];
            }
            case Family::SkewNormal: {
                double z = (x[0] - params[0]) / params[1];
                return 2.0 / params[1] * std_normal_pdf(z) * std_normal_cdf(params[2] * z);
            }
            case Family::StudentT: {
                double df = params[0];
                double loc = params.size() > 1 ? params[1] : 0.0;
                double scale = params.size() > 2 ? params[2] : 1.0;
                double z = (x[0] - loc) / scale;
                return std::exp(lg_norm - 0.5 * (df + 1.0) * std::log1p(z * z / df)) / scale;
            }
            case Family::Gamma: {
                double a = params[0], b = params[1];
                double xx = x[0];
                if (xx < 0.0) return 0.0;
                if (xx == 0.0) return a > 1.0 ? 0.0 : (a == 1.0 ? b : 0.0);
                return std::exp(a * std::log(b) + (a - 1.0) * std::log(xx) - b * xx -
                                std::lgamma(a));
            }
            case Family::VonMises:
                return std::exp(params[1] * std::cos(x[0] - params[0])) / vm_norm;
            case Family::WrappedLaplace: {
                double acc = 0.0;
                for (int k = -wl_wraps; k <= wl_wraps; ++k)
                    acc += asym_laplace(x[0] + two_pi * k, params[0], params[1]);
                return acc;
            }
            case Family::MultivariateNormal: {
                double dx[3];
                for (int a = 0; a < dims; ++a) dx[a] = x[a] - params[a];
                return std::exp(-0.5 * chol.mahalanobis2(dx)) / mvn_norm;
            }
        }
        throw Error("unknown family");
    }
};

FamilyPdf prepare_family(Family family, std::span<const double> params, int dims) {
    FamilyPdf f{family, {params.begin(), params.end()}, dims};
    switch (family) {
        case Family::Normal:
            require(params.size() == 2, "Normal expects {mu, sigma}");
            require(params[1] > 0.0, "Normal: sigma must be positive");
            break;
        case Family::SkewNormal:
            require(params.size() == 3, "SkewNormal expects {location, scale, alpha}");
            require(params[1] > 0.0, "SkewNormal: scale must be positive");
            break;
        case Family::StudentT: {
            require(params.size() >= 1 && params.size() <= 3,
                    "StudentT expects {df [, location, scale]}");
            require(params[0] >= 1.0, "StudentT: df must be >= 1");
            if (params.size() > 2) require(params[2] > 0.0, "StudentT: scale must be positive");
            double df = params[0];
            f.lg_norm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                        0.5 * std::log(df * std::numbers::pi);
            break;
        }
        case Family::Gamma:
            require(params.size() == 2, "Gamma expects {shape, rate}");
            require(params[0] > 0.0 && params[1] > 0.0, "Gamma: parameters must be positive");
            break;
        case Family::VonMises:
            require(params.size() == 2, "VonMises expects {mu, kappa}");
            require(params[1] > 0.0, "VonMises: kappa must be positive");
            f.vm_norm = two_pi * std::cyl_bessel_i(0.0, params[1]);
            break;
        case Family::WrappedLaplace: {
            require(params.size() == 2, "WrappedLaplace expects {lambda, eta}");
            require(params[0] > 0.0 && params[1] > 0.0,
                    "WrappedLaplace: lambda and eta must be positive");
            // Wraps chosen so the dropped tail is below 1e-12 of the density
            // scale: exp(-2*pi*lambda*min(eta,1/eta)*K) < 1e-12.
            double decay = params[0] * std::min(params[1], 1.0 / params[1]);
            f.wl_wraps = std::max(10, static_cast<int>(std::ceil(27.7 / (two_pi * decay))));
            break;
        }
        case Family::MultivariateNormal: {
            std::size_t need = static_cast<std::size_t>(dims) +
                               static_cast<std::size_t>(dims * (dims + 1) / 2);
            require(params.size() == need,
                    "MultivariateNormal expects {mu..., upper-triangle Sigma...}");
            double sigma[9];
            std::size_t p = static_cast<std::size_t>(dims);
            for (int i = 0; i < dims; ++i)
                for (int j = i; j < dims; ++j) {
                    double v = params[p++];
                    sigma[i * dims + j] = v;
                    sigma[j * dims + i] = v;
                }
            f.chol = Chol3::factor(dims, sigma);
            f.mvn_norm = std::pow(two_pi, 0.5 * dims) * std::exp(0.5 * f.chol.log_det);
            break;
        }
    }
    return f;
}

}  // namespace

GridDensity make_parametric(Family family, std::span<const double> params,
                            const DomainSpec& domain, Diagnostics* diag) {
    domain.validate();
    if (is_circular_family(family) != (domain.topology == Topology::Circular))
        throw Error("family/topology mismatch: " + to_string(family) + " on " +
                    to_string(domain.topology) + " domain");
    if (family == Family::MultivariateNormal) {
        if (domain.dims < 1) throw Error("bad domain");
    } else if (domain.dims != 1) {
        throw Error(to_string(family) + " is univariate; domain has dims > 1");
    }
    if (family == Family::Gamma && domain.lower < 0.0)
        throw Error("Gamma requires a nonnegative domain");

    FamilyPdf pdf = prepare_family(family, params, domain.dims);
    std::vector<double> values(domain.node_count());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = pdf(domain.node(i));
    double raw = quadrature_sum(domain, values);
    if (diag && domain.topology == Topology::Linear && std::abs(1.0 - raw) > 1e-6)
        diag->warn("mass outside domain for " + to_string(family) + ": " +
                   format_double(1.0 - raw, 6));
    return GridDensity(domain, std::move(values));
}

DomainSpec default_domain(Family family, std::span<const double> params, int points) {
    if (is_circular_family(family)) {
        DomainSpec d{Topology::Circular, 0.0, two_pi, points > 0 ? points : 2048, 1};
        d.validate();
        return d;
    }
    // Pilot moments per family.
    double lo = 0.0, hi = 0.0;
    auto span1d = [&](double mean, double sd) {
        lo = mean - 8.0 * sd;
        hi = mean + 8.0 * sd;
    };
    int dims = 1;
    switch (family) {
        case Family::Normal:
            span1d(params[0], params[1]);
            break;
        case Family::SkewNormal: {
            double alpha = params[2];
            double delta = alpha / std::sqrt(1.0 + alpha * alpha);
            double mz = delta * std::sqrt(2.0 / std::numbers::pi);
            double mean = params[0] + params[1] * mz;
            double sd = params[1] * std::sqrt(1.0 - mz * mz);
            span1d(mean, sd);
            break;
        }
        case Family::StudentT: {
            double df = params[0];
            double loc = params.size() > 1 ? params[1] : 0.0;
            double scale = params.size() > 2 ? params[2] : 1.0;
            double sd = df > 2.0 ? scale * std::sqrt(df / (df - 2.0)) : scale * 3.0;
            span1d(loc, sd);
            break;
        }
        case Family::Gamma: {
            double mean = params[0] / params[1];
            double sd = std::sqrt(params[0]) / params[1];
            span1d(mean, sd);
            if (lo < 0.0) lo = params[0] < 1.0 ? mean * 1e-6 : 0.0;
            break;
        }
        case Family::MultivariateNormal: {
            // dims from parameter count: d + d(d+1)/2.
            for (dims = 1; dims <= 3; ++dims)
                if (params.size() ==
                    static_cast<std::size_t>(dims) + static_cast<std::size_t>(dims * (dims + 1) / 2))
                    break;
            if (dims > 3) throw Error("MultivariateNormal: bad parameter count");
            lo = 1e300;
            hi = -1e300;
            std::size_t p = static_cast<std::size_t>(dims);
            std::vector<double> var(dims);
            for (int i = 0; i < dims; ++i)
                for (int j = i; j < dims; ++j) {
                    double v = params[p++];
                    if (i == j) var[i] = v;
                }
            for (int a = 0; a < dims; ++a) {
                double sd = std::sqrt(var[a]);
                lo = std::min(lo, params[a] - 8.0 * sd);
                hi = std::max(hi, params[a] + 8.0 * sd);
            }
            break;
        }
        default:
            throw Error("default_domain: unsupported family");
    }
    DomainSpec d{Topology::Linear, lo, hi, points > 0 ? points : default_points_per_axis(dims),
                 dims};
    d.validate();
    return d;
}

// ---------------------------------------------------------------------------
// Kernel density estimation

GridDensity kde(const SampleSet& samples, const DomainSpec& domain,
                std::optional<double> bandwidth) {
    domain.validate();
    samples.validate();
    if (samples.dims != domain.dims) throw Error("kde: sample/domain dimension mismatch");
    const std::size_t n = samples.size();
    if (n < 30) throw Error("kde: need at least 30 draws");

    const bool weighted = !samples.weights.empty();
    const double uw = 1.0 / static_cast<double>(n);

    // Per-axis Silverman bandwidth from (weighted) moments.
    std::vector<double> hs(domain.dims);
    for (int a = 0; a < domain.dims; ++a) {
        if (bandwidth) {
            if (*bandwidth <= 0.0) throw Error("kde: bandwidth must be positive");
            hs[a] = *bandwidth;
            continue;
        }
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            mean += (weighted ? samples.weights[i] : uw) * samples.draw(i)[a];
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = samples.draw(i)[a] - mean;
            var += (weighted ? samples.weights[i] : uw) * d * d;
        }
        if (!weighted) var *= static_cast<double>(n) / static_cast<double>(n - 1);
        if (!(var > 0.0)) throw Error("kde: zero sample variance on axis " + std::to_string(a));
        hs[a] = 1.06 * std::sqrt(var) * std::pow(static_cast<double>(n), -0.2);
    }

    const int m = domain.points_per_axis;
    const double step = domain.spacing();
    std::vector<double> values(domain.node_count(), 0.0);

    if (domain.topology == Topology::Circular) {
        const double h = hs[0];
        const double norm = 1.0 / (h * std::sqrt(two_pi));
        for (std::size_t i = 0; i < n; ++i) {
            double xi = samples.draw(i)[0];
            double wi = weighted ? samples.weights[i] : uw;
            for (int j = 0; j < m; ++j) {
                double d0 = domain.axis_coord(j) - xi;
                double acc = 0.0;
                for (int k = -3; k <= 3; ++k) {
                    double z = (d0 + two_pi * k) / h;
                    acc += std::exp(-0.5 * z * z);
                }
                values[j] += wi * norm * acc;
            }
        }
        return GridDensity(domain, std::move(values));
    }

    // Linear domains: truncate the kernel at 8 bandwidths (relative error
    // below 1.3e-14) and touch only the covered node window.
    double norm = 1.0;
    for (int a = 0; a < domain.dims; ++a) norm /= hs[a] * std::sqrt(two_pi);
    const double tol = step * 1e-9;
    for (std::size_t i = 0; i < n; ++i) {
        auto x = samples.draw(i);
        double wi = (weighted ? samples.weights[i] : uw) * norm;
        int lo[3], hi[3];
        for (int a = 0; a < domain.dims; ++a) {
            if (x[a] < domain.lower - tol || x[a] > domain.upper + tol)
                throw Error("kde: draw outside the declared domain");
            double r = 8.0 * hs[a];
            lo[a] = std::max(0, static_cast<int>(std::ceil((x[a] - r - domain.lower) / step)));
            hi[a] = std::min(m - 1, static_cast<int>(std::floor((x[a] + r - domain.lower) / step)));
        }
        auto kern = [&](int a, int j) {
            double z = (domain.axis_coord(j) - x[a]) / hs[a];
            return std::exp(-0.5 * z * z);
        };
        if (domain.dims == 1) {
            for (int j = lo[0]; j <= hi[0]; ++j) values[j] += wi * kern(0, j);
        } else if (domain.dims == 2) {
            for (int j = lo[0]; j <= hi[0]; ++j) {
                double k0 = wi * kern(0, j);
                std::size_t row = static_cast<std::size_t>(j) * m;
                for (int k = lo[1]; k <= hi[1]; ++k) values[row + k] += k0 * kern(1, k);
            }
        } else {
            for (int j = lo[0]; j <= hi[0]; ++j) {
                double k0 = wi * kern(0, j);
                for (int k = lo[1]; k <= hi[1]; ++k) {
                    double k1 = k0 * kern(1, k);
                    std::size_t row = (static_cast<std::size_t>(j) * m + k) * m;
                    for (int l = lo[2]; l <= hi[2]; ++l) values[row + l] += k1 * kern(2, l);
                }
            }
        }
    }
    return GridDensity(domain, std::move(values));
}

// ---------------------------------------------------------------------------
// CSV layout: one metadata header row, then node,value rows.

std::string GridDensity::to_csv() const {
    std::ostringstream out;
    out << "topology=" << to_string(domain_.topology) << ",dims=" << domain_.dims
        << ",lower=" << format_double(domain_.lower, 17)
        << ",upper=" << format_double(domain_.upper, 17)
        << ",points_per_axis=" << domain_.points_per_axis << "\n";
    for (std::size_t i = 0; i < values_.size(); ++i) {
        auto x = domain_.node(i);
        for (int a = 0; a < domain_.dims; ++a) out << format_double(x[a]) << ",";
        out << format_double(values_[i], 17) << "\n";
    }
    return out.str();
}

GridDensity GridDensity::from_csv_text(const std::string& text) {
    std::istringstream in(text);
    std::string header;
    if (!std::getline(in, header)) throw Error("grid csv: empty");
    DomainSpec d;
    std::istringstream hs(header);
    std::string field;
    while (std::getline(hs, field, ',')) {
        auto eq = field.find('=');
        if (eq == std::string::npos) throw Error("grid csv: bad header field '" + field + "'");
        std::string key = field.substr(0, eq), val = field.substr(eq + 1);
        if (key == "topology") d.topology = topology_from_string(val);
        else if (key == "dims") d.dims = std::stoi(val);
        else if (key == "lower") d.lower = std::stod(val);
        else if (key == "upper") d.upper = std::stod(val);
        else if (key == "points_per_axis") d.points_per_axis = std::stoi(val);
        else throw Error("grid csv: unknown header key '" + key + "'");
    }
    d.validate();
    std::vector<double> vals;
    vals.reserve(d.node_count());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto last = line.find_last_of(',');
        if (last == std::string::npos) throw Error("grid csv: bad data row");
        vals.push_back(std::stod(line.substr(last + 1)));
    }
    return GridDensity(d, std::move(vals));
}

}  // namespace frao
