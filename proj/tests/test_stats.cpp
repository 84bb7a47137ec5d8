#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "msspeech/error.hpp"
#include "msspeech/rng.hpp"
#include "msspeech/stats.hpp"

using namespace msspeech;

namespace {

// ---- definitional oracles, independent of the implementation under test ----

// Pearson r straight from the definition
double pearson_r_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0.0, sy = 0.0, sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
    }
    const double num = static_cast<double>(n) * sxy - sx * sy;
    const double den = std::sqrt(static_cast<double>(n) * sxx - sx * sx) *
                       std::sqrt(static_cast<double>(n) * syy - sy * sy);
    return num / den;
}

// upper tail of Student's t by Simpson integration of the density
double t_upper_tail_oracle(double t, double df) {
    const double log_norm = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                            0.5 * std::log(df * std::acos(-1.0));
    auto pdf = [&](double u) {
        return std::exp(log_norm - (df + 1.0) / 2.0 * std::log1p(u * u / df));
    };
    // integrate from t to a far cutoff
    const double hi = std::max(std::fabs(t), 1.0) * 400.0;
    const int steps = 400000;
    const double h = (hi - t) / steps;
    double sum = pdf(t) + pdf(hi);
    for (int i = 1; i < steps; ++i) {
        sum += pdf(t + h * i) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

// exact two-sample KS p by unnormalized lattice-path counting in long double
long double binom_ld(int n, int k) {
    long double r = 1.0L;
    for (int i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / i;
    return r;
}

double ks_exact_p_oracle(int m, int n, double d) {
    const long double limit =
        static_cast<long double>(d) * m * n - 1e-7L;  // block paths reaching d
    std::vector<std::vector<long double>> u(
        static_cast<std::size_t>(m) + 1,
        std::vector<long double>(static_cast<std::size_t>(n) + 1, 0.0L));
    u[0][0] = 1.0L;
    for (int i = 0; i <= m; ++i) {
        for (int j = 0; j <= n; ++j) {
            if (i == 0 && j == 0) continue;
            const long double dev = std::fabs(static_cast<long double>(i) * n -
                                              static_cast<long double>(j) * m);
            if (dev > limit) {
                u[i][j] = 0.0L;
                continue;
            }
            long double v = 0.0L;
            if (i > 0) v += u[i - 1][j];
            if (j > 0) v += u[i][j - 1];
            u[i][j] = v;
        }
    }
    return static_cast<double>(1.0L - u[m][n] / binom_ld(m + n, m));
}

// brute-force ECDF sweep over all pooled values
double ks_d_oracle(std::vector<double> x, std::vector<double> y) {
    std::vector<double> pooled(x);
    pooled.insert(pooled.end(), y.begin(), y.end());
    double d = 0.0;
    for (double v : pooled) {
        double fx = 0.0, fy = 0.0;
        for (double e : x) fx += e <= v ? 1.0 : 0.0;
        for (double e : y) fy += e <= v ? 1.0 : 0.0;
        d = std::max(d, std::fabs(fx / static_cast<double>(x.size()) -
                                  fy / static_cast<double>(y.size())));
    }
    return d;
}

// plain textbook IRLS on a fixed design matrix (intercept + standardized
// predictors), no ridge; used to cross-check logistic_glm coefficients
std::vector<double> irls_oracle(const std::vector<std::vector<double>>& cols,
                                const std::vector<int>& y, int iters = 60) {
    const std::size_t n = y.size();
    const std::size_t p = cols.size();

    // standardize exactly like the implementation contract says
    std::vector<std::vector<double>> x(n, std::vector<double>(p + 1, 1.0));
    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0;
        for (double v : cols[j]) mean += v;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : cols[j]) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        for (std::size_t i = 0; i < n; ++i) x[i][j + 1] = (cols[j][i] - mean) / sd;
    }

    std::vector<double> beta(p + 1, 0.0);
    for (int it = 0; it < iters; ++it) {
        std::vector<std::vector<double>> a(p + 1, std::vector<double>(p + 1, 0.0));
        std::vector<double> b(p + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double eta = 0.0;
            for (std::size_t j = 0; j <= p; ++j) eta += beta[j] * x[i][j];
            const double mu = 1.0 / (1.0 + std::exp(-eta));
            const double w = std::max(mu * (1.0 - mu), 1e-12);
            const double z = eta + (y[i] - mu) / w;
            for (std::size_t aj = 0; aj <= p; ++aj) {
                b[aj] += w * x[i][aj] * z;
                for (std::size_t bj = 0; bj <= p; ++bj) a[aj][bj] += w * x[i][aj] * x[i][bj];
            }
        }
        // Gaussian elimination
        for (std::size_t col = 0; col <= p; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r <= p; ++r) {
                if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
            }
            std::swap(a[col], a[piv]);
            std::swap(b[col], b[piv]);
            for (std::size_t r = 0; r <= p; ++r) {
                if (r == col) continue;
                const double f = a[r][col] / a[col][col];
                for (std::size_t c2 = 0; c2 <= p; ++c2) a[r][c2] -= f * a[col][c2];
                b[r] -= f * b[col];
            }
        }
        for (std::size_t j = 0; j <= p; ++j) b[j] /= a[j][j];
        beta = b;
    }
    return beta;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("pearson worked examples") {
    const CorrelationResult up =
        pearson_one_sided(std::vector<double>{1, 2, 3, 4}, std::vector<double>{2, 4, 6, 8});
    CHECK(up.r == doctest::Approx(1.0));
    CHECK(up.p_one_sided == doctest::Approx(0.0));

    const CorrelationResult down =
        pearson_one_sided(std::vector<double>{1, 2, 3, 4}, std::vector<double>{-1, -2, -3, -4});
    CHECK(down.r == doctest::Approx(-1.0));
    CHECK(down.p_one_sided == doctest::Approx(1.0));

    CHECK_THROWS_AS(
        pearson_one_sided(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
        ContractError);
    CHECK_THROWS_AS(pearson_one_sided(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                    ContractError);
}

TEST_CASE("pearson matches the definitional oracle to 1e-8") {
    Rng rng(2024);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> x(50), y(50);
        for (std::size_t i = 0; i < 50; ++i) {
            x[i] = rng.normal(0.0, 2.0);
            y[i] = 0.6 * x[i] + rng.normal(0.0, 1.5);
        }
        const CorrelationResult res = pearson_one_sided(x, y);
        const double r_ref = pearson_r_oracle(x, y);
        CHECK(std::fabs(res.r - r_ref) <= 1e-12);

        const double t = r_ref * std::sqrt(48.0 / (1.0 - r_ref * r_ref));
        const double p_ref = t_upper_tail_oracle(t, 48.0);
        CHECK(std::fabs(res.p_one_sided - p_ref) <= 1e-8);
    }
}

TEST_CASE("pearson invariances") {
    Rng rng(9);
    std::vector<double> x(30), y(30);
    for (std::size_t i = 0; i < 30; ++i) {
        x[i] = rng.uniform(-1.0, 1.0);
        y[i] = rng.uniform(-1.0, 1.0);
    }
    const CorrelationResult base = pearson_one_sided(x, y);

    std::vector<double> ax(x);
    for (auto& v : ax) v = 3.5 * v + 11.0;  // positive affine
    CHECK(pearson_one_sided(ax, y).r == doctest::Approx(base.r).epsilon(1e-12));

    std::vector<double> nx(x);
    for (auto& v : nx) v = -v;
    CHECK(pearson_one_sided(nx, y).r == doctest::Approx(-base.r).epsilon(1e-12));
}

TEST_CASE("ks worked examples") {
    const KSResult same = ks_two_sample(std::vector<double>{1, 2, 3},
                                        std::vector<double>{1, 2, 3});
    CHECK(same.d_statistic == 0.0);
    CHECK(same.p_value == doctest::Approx(1.0));
    CHECK(same.ties);

    const KSResult disjoint =
        ks_two_sample(std::vector<double>{1, 2}, std::vector<double>{3, 4});
    CHECK(disjoint.d_statistic == 1.0);
    CHECK(disjoint.exact_p);
    // 4 of the C(4,2)=6 interleavings stay strictly inside D < 1
    CHECK(disjoint.p_value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // D = 1 with m = n = 3: only the 2 fully separated interleavings reach it
    const KSResult disjoint3 =
        ks_two_sample(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6});
    CHECK(disjoint3.d_statistic == 1.0);
    CHECK(disjoint3.p_value == doctest::Approx(2.0 / 20.0).epsilon(1e-12));

    CHECK_THROWS_AS(ks_two_sample(std::vector<double>{}, std::vector<double>{1.0}),
                    ContractError);
}

TEST_CASE("ks D equals the brute-force sweep and p the exact recursion") {
    Rng rng(606);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> x(20), y(20);
        for (auto& v : x) v = rng.normal(0.0, 1.0);
        for (auto& v : y) v = rng.normal(0.4, 1.2);
        const KSResult res = ks_two_sample(x, y);
        CHECK(res.d_statistic == ks_d_oracle(x, y));
        REQUIRE(res.exact_p);
        CHECK(std::fabs(res.p_value - ks_exact_p_oracle(20, 20, res.d_statistic)) <= 1e-6);
    }
}

TEST_CASE("ks invariances") {
    Rng rng(33);
    std::vector<double> x(25), y(18);
    for (auto& v : x) v = rng.uniform(0.0, 4.0);
    for (auto& v : y) v = rng.uniform(0.5, 4.5);
    const KSResult base = ks_two_sample(x, y);

    // symmetric
    CHECK(ks_two_sample(y, x).d_statistic == base.d_statistic);

    // strictly increasing transform leaves D unchanged (rank based)
    std::vector<double> tx(x), ty(y);
    for (auto& v : tx) v = std::exp(v) + v * v * 0.1;
    for (auto& v : ty) v = std::exp(v) + v * v * 0.1;
    CHECK(ks_two_sample(tx, ty).d_statistic == base.d_statistic);
}

TEST_CASE("ks crossover and tie fallback") {
    Rng rng(17);
    {
        // n1*n2 beyond the exact crossover -> asymptotic
        std::vector<double> x(101), y(101);
        for (auto& v : x) v = rng.normal(0.0, 1.0);
        for (auto& v : y) v = rng.normal(0.0, 1.0);
        const KSResult res = ks_two_sample(x, y);
        CHECK_FALSE(res.exact_p);
    }
    {
        // ties force the asymptotic path even for small n
        std::vector<double> x = {1.0, 1.0, 2.0, 3.0};
        std::vector<double> y = {1.5, 2.5, 3.5, 4.5};
        const KSResult res = ks_two_sample(x, y);
        CHECK(res.ties);
        CHECK_FALSE(res.exact_p);
    }
    {
        // study-scale cohorts (65 vs 66, tie-free) still sit under the
        // n1*n2 <= 10000 crossover, so the recursion applies
        std::vector<double> x(65), y(66);
        for (auto& v : x) v = rng.normal(0.0, 1.0);
        for (auto& v : y) v = rng.normal(2.0, 1.0);
        const KSResult res = ks_two_sample(x, y);
        CHECK(res.exact_p);
        CHECK(res.p_value < 1e-6);
    }
}

TEST_CASE("glm zero coefficient under a mirrored design") {
    // predictor 0 carries the signal; predictor 1 is mirrored so that for
    // every (x0, x1, y) the row (x0, -x1, y) also appears
    std::vector<double> x0, x1;
    std::vector<int> y;
    Rng rng(41);
    for (int i = 0; i < 80; ++i) {
        const double a = rng.normal(0.0, 1.0);
        const double b = rng.normal(0.0, 1.0);
        const int label = rng.bernoulli(1.0 / (1.0 + std::exp(-1.2 * a))) ? 1 : 0;
        x0.push_back(a);
        x1.push_back(b);
        y.push_back(label);
        x0.push_back(a);
        x1.push_back(-b);
        y.push_back(label);
    }
    const std::vector<std::string> names = {"signal", "mirrored"};
    const GLMResult res = logistic_glm({x0, x1}, names, y);
    REQUIRE(res.converged);
    CHECK(std::fabs(res.terms[1].coefficient) <= 1e-6);
}

TEST_CASE("glm strong predictor reaches significance") {
    Rng rng(52);
    std::vector<double> x0, x1;
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
        const double a = rng.normal(0.0, 1.0);
        const double noise = rng.normal(0.0, 1.0);
        x0.push_back(a);
        x1.push_back(noise);
        y.push_back(rng.bernoulli(1.0 / (1.0 + std::exp(-1.5 * a))) ? 1 : 0);
    }
    const std::vector<std::string> names = {"strong", "noise"};
    const GLMResult res = logistic_glm({x0, x1}, names, y);
    REQUIRE(res.converged);
    CHECK(res.terms[0].p_two_sided < 0.001);
}

TEST_CASE("glm coefficients match an independent IRLS to 1e-6") {
    Rng rng(63);
    std::vector<std::vector<double>> cols(3);
    std::vector<int> y;
    for (int i = 0; i < 120; ++i) {
        const double a = rng.normal(0.0, 1.0);
        const double b = rng.normal(0.0, 2.0);
        const double c = rng.uniform(-1.0, 1.0);
        cols[0].push_back(a);
        cols[1].push_back(b);
        cols[2].push_back(c);
        const double eta = 0.8 * a - 0.5 * b + 0.3 * c - 0.2;
        y.push_back(rng.bernoulli(1.0 / (1.0 + std::exp(-eta))) ? 1 : 0);
    }
    const std::vector<std::string> names = {"a", "b", "c"};
    const GLMResult res = logistic_glm(cols, names, y);
    REQUIRE(res.converged);

    const std::vector<double> ref = irls_oracle(cols, y);
    CHECK(std::fabs(res.intercept.coefficient - ref[0]) <= 1e-6);
    CHECK(std::fabs(res.terms[0].coefficient - ref[1]) <= 1e-6);
    CHECK(std::fabs(res.terms[1].coefficient - ref[2]) <= 1e-6);
    CHECK(std::fabs(res.terms[2].coefficient - ref[3]) <= 1e-6);
}

TEST_CASE("glm p-values invariant under predictor rescaling") {
    Rng rng(74);
    std::vector<std::vector<double>> cols(2);
    std::vector<int> y;
    for (int i = 0; i < 150; ++i) {
        const double a = rng.normal(0.0, 1.0);
        const double b = rng.normal(0.0, 1.0);
        cols[0].push_back(a);
        cols[1].push_back(b);
        const double eta = 0.9 * a + 0.4 * b;
        y.push_back(rng.bernoulli(1.0 / (1.0 + std::exp(-eta))) ? 1 : 0);
    }
    const std::vector<std::string> names = {"a", "b"};
    const GLMResult base = logistic_glm(cols, names, y);

    std::vector<std::vector<double>> scaled = cols;
    for (auto& v : scaled[0]) v *= 1000.0;
    const GLMResult res = logistic_glm(scaled, names, y);
    CHECK(std::fabs(res.terms[0].p_two_sided - base.terms[0].p_two_sided) <= 1e-6);
    CHECK(std::fabs(res.terms[1].p_two_sided - base.terms[1].p_two_sided) <= 1e-6);
}

TEST_CASE("glm flags separation instead of throwing") {
    std::vector<double> x;
    std::vector<int> y;
    for (int i = 0; i < 30; ++i) {
        x.push_back(static_cast<double>(i));
        y.push_back(i < 15 ? 0 : 1);  // perfectly separable
    }
    const std::vector<std::string> names = {"x"};
    const GLMResult res = logistic_glm({x}, names, y);
    CHECK_FALSE(res.converged);
    CHECK(res.n_iterations >= 1);
}

TEST_CASE("glm rejects constant predictors") {
    std::vector<double> x(20, 3.0);
    std::vector<double> ok(20);
    std::vector<int> y(20);
    for (int i = 0; i < 20; ++i) {
        ok[static_cast<std::size_t>(i)] = i;
        y[static_cast<std::size_t>(i)] = i % 2;
    }
    const std::vector<std::string> names = {"flat", "ok"};
    CHECK_THROWS_AS(logistic_glm({x, ok}, names, y), ContractError);
}

TEST_CASE("validate_features") {
    FeatureColumnTable a;
    a.subject_ids = {"s1", "s2", "s3", "s4", "s5"};
    Rng rng(85);
    std::vector<double> col1, col2;
    for (int i = 0; i < 5; ++i) {
        col1.push_back(rng.uniform(0.0, 10.0));
        col2.push_back(rng.uniform(0.0, 10.0));
    }
    a.columns = {{"beta", col1}, {"alpha", col2}};

    SUBCASE("identical tables correlate perfectly") {
        const auto rows = validate_features(a, a);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].first == "alpha");  // sorted by name
        CHECK(rows[1].first == "beta");
        CHECK(rows[0].second.r == doctest::Approx(1.0));
        CHECK(rows[1].second.r == doctest::Approx(1.0));
    }

    SUBCASE("small noise keeps r above 0.9") {
        FeatureColumnTable ref = a;
        Rng noise(86);
        for (auto& [name, col] : ref.columns) {
            for (auto& v : col) v += noise.normal(0.0, 0.05);
        }
        for (const auto& [name, corr] : validate_features(a, ref)) {
            CHECK(corr.r > 0.9);
        }
    }

    SUBCASE("subjects are matched by id, not position") {
        FeatureColumnTable ref = a;
        std::reverse(ref.subject_ids.begin(), ref.subject_ids.end());
        for (auto& [name, col] : ref.columns) std::reverse(col.begin(), col.end());
        const auto rows = validate_features(a, ref);
        CHECK(rows[0].second.r == doctest::Approx(1.0));
        CHECK(rows[0].second.n == 5);
    }

    SUBCASE("errors") {
        FeatureColumnTable few = a;
        few.subject_ids = {"s1", "s2", "zzz", "yyy", "xxx"};
        CHECK_THROWS_AS(validate_features(a, few), InsufficientDataError);

        FeatureColumnTable other = a;
        other.columns[0].first = "gamma";
        CHECK_THROWS_AS(validate_features(a, other), ConfigError);
    }
}

}  // TEST_SUITE
