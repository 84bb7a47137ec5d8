#include "msspeech/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "msspeech/error.hpp"

namespace msspeech {

// ---------------------------------------------------------------------------
// special functions

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// continued fraction for the incomplete beta (Lentz's method)
double betacf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(b) - std::lgamma(a) +
                          b * std::log1p(-x) + a * std::log(x)) *
                     betacf(b, a, 1.0 - x) / b;
}

double students_t_upper_tail(double t, double df) {
    if (std::isinf(t)) return t > 0.0 ? 0.0 : 1.0;
    const double half = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
    return t >= 0.0 ? half : 1.0 - half;
}

// ---------------------------------------------------------------------------
// Pearson

CorrelationResult pearson_one_sided(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ContractError("pearson: vectors differ in length");
    const std::size_t n = x.size();
    if (n < 3) throw ContractError("pearson: needs at least 3 pairs");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        throw ContractError("pearson: zero variance in input");
    }

    CorrelationResult res;
    res.n = n;
    res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double df = static_cast<double>(n - 2);
    double t;
    if (res.r >= 1.0) {
        t = std::numeric_limits<double>::infinity();
    } else if (res.r <= -1.0) {
        t = -std::numeric_limits<double>::infinity();
    } else {
        t = res.r * std::sqrt(df / (1.0 - res.r * res.r));
    }
    res.p_one_sided = students_t_upper_tail(t, df);
    return res;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

namespace {

// P(D >= d) for samples of sizes m, n without ties: fraction of interleavings
// whose ECDF path stays within |i/m - j/n| < d, via the normalized recursion
// u(i,j) = (i*u(i-1,j) + j*u(i,j-1)) / (i+j), blocked where |i*n - j*m|
// reaches d*m*n.
double ks_exact_p(std::size_t m, std::size_t n, double d) {
    const double threshold =
        d * static_cast<double>(m) * static_cast<double>(n) - 1e-7;
    std::vector<double> row(n + 1, 0.0);
    row[0] = 1.0;
    for (std::size_t j = 1; j <= n; ++j) {
        const double dev = std::fabs(-static_cast<double>(j * m));
        row[j] = dev > threshold ? 0.0 : row[j - 1];
    }
    for (std::size_t i = 1; i <= m; ++i) {
        const double in = static_cast<double>(i) * static_cast<double>(n);
        for (std::size_t j = 0; j <= n; ++j) {
            const double dev = std::fabs(in - static_cast<double>(j) * static_cast<double>(m));
            if (dev > threshold) {
                row[j] = 0.0;
            } else {
                const double up = row[j];  // u(i-1, j)
                const double left = j > 0 ? row[j - 1] : 0.0;
                row[j] = (static_cast<double>(i) * up + static_cast<double>(j) * left) /
                         static_cast<double>(i + j);
            }
        }
    }
    return std::clamp(1.0 - row[n], 0.0, 1.0);
}

// Kolmogorov limiting distribution: Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2)
double kolmogorov_q(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * static_cast<double>(k) * k * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KSResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw ContractError("ks_two_sample: empty sample");

    std::vector<double> xs(x.begin(), x.end());
    std::vector<double> ys(y.begin(), y.end());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());

    KSResult res;
    res.n1 = xs.size();
    res.n2 = ys.size();

    // sweep the merged order; ECDF gaps evaluated after consuming all
    // observations equal to the current value, which handles ties exactly
    const double n1 = static_cast<double>(xs.size());
    const double n2 = static_cast<double>(ys.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < xs.size() || j < ys.size()) {
        double v;
        if (i < xs.size() && j < ys.size()) {
            v = std::min(xs[i], ys[j]);
        } else if (i < xs.size()) {
            v = xs[i];
        } else {
            v = ys[j];
        }
        while (i < xs.size() && xs[i] == v) ++i;
        while (j < ys.size() && ys[j] == v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
    }
    res.d_statistic = d;

    for (std::size_t k = 0; !res.ties && k + 1 < xs.size(); ++k) res.ties = xs[k] == xs[k + 1];
    for (std::size_t k = 0; !res.ties && k + 1 < ys.size(); ++k) res.ties = ys[k] == ys[k + 1];
    if (!res.ties) {
        std::size_t a = 0, b = 0;
        while (!res.ties && a < xs.size() && b < ys.size()) {
            if (xs[a] == ys[b]) res.ties = true;
            else if (xs[a] < ys[b]) ++a;
            else ++b;
        }
    }

    if (!res.ties && xs.size() * ys.size() <= 10000) {
        res.p_value = ks_exact_p(xs.size(), ys.size(), d);
        res.exact_p = true;
    } else {
        const double ne = n1 * n2 / (n1 + n2);
        res.p_value = kolmogorov_q(std::sqrt(ne) * d);
    }
    return res;
}

// ---------------------------------------------------------------------------
// logistic GLM

namespace {

// solves A x = b for symmetric positive definite A (in place Cholesky)
bool solve_spd(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double sum = a[i][j];
            for (std::size_t k = 0; k < i; ++k) sum -= a[i][k] * a[j][k];
            if (i == j) {
                if (!(sum > 0.0)) return false;
                a[i][i] = std::sqrt(sum);
            } else {
                a[j][i] = sum / a[i][i];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double sum = b[i];
        for (std::size_t k = 0; k < i; ++k) sum -= a[i][k] * b[k];
        b[i] = sum / a[i][i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double sum = b[i];
        for (std::size_t k = i + 1; k < n; ++k) sum -= a[k][i] * b[k];
        b[i] = sum / a[i][i];
    }
    return true;
}

// inverse of SPD matrix via Cholesky factor already in a (lower triangle)
std::vector<std::vector<double>> spd_inverse(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    // factor
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double sum = a[i][j];
            for (std::size_t k = 0; k < i; ++k) sum -= a[i][k] * a[j][k];
            if (i == j) {
                if (!(sum > 0.0)) return {};
                a[i][i] = std::sqrt(sum);
            } else {
                a[j][i] = sum / a[i][i];
            }
        }
    }
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    std::vector<double> col(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::fill(col.begin(), col.end(), 0.0);
        col[c] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            double sum = col[i];
            for (std::size_t k = 0; k < i; ++k) sum -= a[i][k] * col[k];
            col[i] = sum / a[i][i];
        }
        for (std::size_t i = n; i-- > 0;) {
            double sum = col[i];
            for (std::size_t k = i + 1; k < n; ++k) sum -= a[k][i] * col[k];
            col[i] = sum / a[i][i];
        }
        for (std::size_t i = 0; i < n; ++i) inv[i][c] = col[i];
    }
    return inv;
}

}  // namespace

GLMResult logistic_glm(const std::vector<std::vector<double>>& predictor_columns,
                       std::span<const std::string> predictor_names,
                       std::span<const int> outcomes) {
    const std::size_t p = predictor_columns.size();
    const std::size_t n = outcomes.size();
    if (p == 0 || predictor_names.size() != p) {
        throw ContractError("logistic_glm: predictor names/columns mismatch");
    }
    for (const auto& col : predictor_columns) {
        if (col.size() != n) throw ContractError("logistic_glm: ragged predictor columns");
    }
    if (n <= p + 1) throw ContractError("logistic_glm: needs n > p + 1");

    // standardize predictors
    std::vector<std::vector<double>> z(p, std::vector<double>(n));
    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0;
        for (double v : predictor_columns[j]) mean += v;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : predictor_columns[j]) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 0.0)) {
            throw ContractError("logistic_glm: constant predictor column '" +
                                predictor_names[j] + "'");
        }
        for (std::size_t i = 0; i < n; ++i) z[j][i] = (predictor_columns[j][i] - mean) / sd;
    }

    constexpr double ridge = 1e-8;
    constexpr int max_iter = 50;
    constexpr double tol = 1e-8;

    const std::size_t dim = p + 1;  // intercept first
    std::vector<double> beta(dim, 0.0);
    std::vector<double> eta(n), mu(n), wt(n), resid(n);
    std::vector<std::vector<double>> xtwx(dim, std::vector<double>(dim));
    std::vector<double> xtwz(dim);

    auto design = [&](std::size_t row, std::size_t col) -> double {
        return col == 0 ? 1.0 : z[col - 1][row];
    };

    GLMResult res;
    for (int iter = 1; iter <= max_iter; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double e = beta[0];
            for (std::size_t j = 1; j < dim; ++j) e += beta[j] * z[j - 1][i];
            eta[i] = e;
            const double m = 1.0 / (1.0 + std::exp(-e));
            mu[i] = m;
            wt[i] = std::max(m * (1.0 - m), 1e-12);
            resid[i] = static_cast<double>(outcomes[i]) - m;
        }
        for (std::size_t a = 0; a < dim; ++a) {
            xtwz[a] = 0.0;
            for (std::size_t b = 0; b <= a; ++b) xtwx[a][b] = 0.0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double zi = eta[i] + resid[i] / wt[i];
            for (std::size_t a = 0; a < dim; ++a) {
                const double xa = design(i, a);
                xtwz[a] += wt[i] * xa * zi;
                for (std::size_t b = 0; b <= a; ++b) {
                    xtwx[a][b] += wt[i] * xa * design(i, b);
                }
            }
        }
        for (std::size_t a = 0; a < dim; ++a) {
            xtwx[a][a] += ridge;
            for (std::size_t b = a + 1; b < dim; ++b) xtwx[a][b] = xtwx[b][a];
        }

        std::vector<std::vector<double>> lhs = xtwx;
        std::vector<double> next = xtwz;
        if (!solve_spd(lhs, next)) {
            res.n_iterations = iter;
            res.converged = false;
            break;
        }
        double max_delta = 0.0;
        for (std::size_t a = 0; a < dim; ++a) {
            max_delta = std::max(max_delta, std::fabs(next[a] - beta[a]));
        }
        beta = next;
        res.n_iterations = iter;
        if (max_delta < tol) {
            res.converged = true;
            break;
        }
    }

    // Wald statistics from the final information matrix; saturated fitted
    // probabilities mean separation, which IRLS stalls on rather than
    // converging to a maximum likelihood estimate
    bool saturated = false;
    for (std::size_t i = 0; i < n; ++i) {
        double e = beta[0];
        for (std::size_t j = 1; j < dim; ++j) e += beta[j] * z[j - 1][i];
        const double m = 1.0 / (1.0 + std::exp(-e));
        if (m < 1e-10 || m > 1.0 - 1e-10) saturated = true;
        wt[i] = std::max(m * (1.0 - m), 1e-12);
    }
    if (saturated) res.converged = false;
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += wt[i] * design(i, a) * design(i, b);
            xtwx[a][b] = s;
            xtwx[b][a] = s;
        }
        xtwx[a][a] += ridge;
    }
    const std::vector<std::vector<double>> cov = spd_inverse(xtwx);

    auto make_term = [&](std::size_t idx, const std::string& name) {
        GLMTerm t;
        t.name = name;
        t.coefficient = beta[idx];
        t.std_error = cov.empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : std::sqrt(std::max(cov[idx][idx], 0.0));
        if (t.std_error > 0.0 && std::isfinite(t.std_error)) {
            t.z = t.coefficient / t.std_error;
            t.p_two_sided = 2.0 * normal_cdf(-std::fabs(t.z));
        } else {
            t.z = 0.0;
            t.p_two_sided = 1.0;
        }
        return t;
    };
    res.intercept = make_term(0, "(intercept)");
    for (std::size_t j = 0; j < p; ++j) {
        res.terms.push_back(make_term(j + 1, predictor_names[j]));
    }
    return res;
}

// ---------------------------------------------------------------------------
// validation correlations

std::vector<std::pair<std::string, CorrelationResult>> validate_features(
    const FeatureColumnTable& automatic, const FeatureColumnTable& reference) {
    std::set<std::string> auto_cols, ref_cols;
    for (const auto& [name, col] : automatic.columns) auto_cols.insert(name);
    for (const auto& [name, col] : reference.columns) ref_cols.insert(name);
    if (auto_cols != ref_cols) {
        throw ConfigError("validate_features: feature columns differ between tables");
    }

    std::map<std::string, std::size_t> ref_index;
    for (std::size_t i = 0; i < reference.subject_ids.size(); ++i) {
        ref_index[reference.subject_ids[i]] = i;
    }
    std::vector<std::pair<std::size_t, std::size_t>> common;  // (auto row, ref row)
    for (std::size_t i = 0; i < automatic.subject_ids.size(); ++i) {
        const auto it = ref_index.find(automatic.subject_ids[i]);
        if (it != ref_index.end()) common.emplace_back(i, it->second);
    }
    if (common.size() < 3) {
        throw InsufficientDataError("validate_features: fewer than 3 common subjects");
    }

    std::map<std::string, const std::vector<double>*> ref_col_by_name;
    for (const auto& [name, col] : reference.columns) ref_col_by_name[name] = &col;

    std::vector<std::pair<std::string, CorrelationResult>> out;
    for (const auto& [name, col] : automatic.columns) {
        const std::vector<double>& rcol = *ref_col_by_name.at(name);
        std::vector<double> a, r;
        a.reserve(common.size());
        r.reserve(common.size());
        for (const auto& [ai, ri] : common) {
            a.push_back(col[ai]);
            r.push_back(rcol[ri]);
        }
        out.emplace_back(name, pearson_one_sided(a, r));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });
    return out;
}

}  // namespace msspeech
