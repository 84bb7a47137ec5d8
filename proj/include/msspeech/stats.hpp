#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace msspeech {

struct CorrelationResult {
    double r = 0.0;
    double p_one_sided = 1.0;  // upper tail: H1 is "true correlation > 0"
    std::size_t n = 0;
};

struct KSResult {
    double d_statistic = 0.0;
    double p_value = 1.0;
    std::size_t n1 = 0, n2 = 0;
    bool ties = false;            // pooled sample contains ties
    bool exact_p = false;         // p from the exact recursion (no ties, n1*n2 <= 10000)
};

struct GLMTerm {
    std::string name;
    double coefficient = 0.0;  // on the internally standardized predictor scale
    double std_error = 0.0;
    double z = 0.0;
    double p_two_sided = 1.0;
};

struct GLMResult {
    GLMTerm intercept;
    std::vector<GLMTerm> terms;
    bool converged = false;
    int n_iterations = 0;
};

// Pearson correlation with a one-sided p-value from the t transform
// t = r * sqrt((n-2) / (1-r^2)) on n-2 degrees of freedom.
CorrelationResult pearson_one_sided(std::span<const double> x, std::span<const double> y);

// Two-sample Kolmogorov-Smirnov test. D is the exact sup-distance between the
// two ECDFs. p is exact (path-counting recursion) when n1*n2 <= 10000 and the
// pooled sample has no ties; otherwise the asymptotic Kolmogorov series with
// effective n = n1*n2/(n1+n2).
KSResult ks_two_sample(std::span<const double> x, std::span<const double> y);

// Logistic regression (logit link) by iteratively reweighted least squares
// with a small ridge (1e-8). Predictors are z-score standardized internally
// and coefficients reported on that scale. Non-convergence (e.g. separation)
// is flagged, not thrown.
GLMResult logistic_glm(const std::vector<std::vector<double>>& predictor_columns,
                       std::span<const std::string> predictor_names,
                       std::span<const int> outcomes);

// Column-oriented feature table used for the validation correlations.
struct FeatureColumnTable {
    std::vector<std::string> subject_ids;
    std::vector<std::pair<std::string, std::vector<double>>> columns;
};

// Per-feature Pearson correlation between automatically and manually derived
// features over subjects present in both tables; sorted by feature name.
std::vector<std::pair<std::string, CorrelationResult>> validate_features(
    const FeatureColumnTable& automatic, const FeatureColumnTable& reference);

// -- shared numeric helpers ---------------------------------------------------

double normal_cdf(double x);
double students_t_upper_tail(double t, double df);
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace msspeech
