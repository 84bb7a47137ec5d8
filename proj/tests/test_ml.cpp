#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "msspeech/error.hpp"
#include "msspeech/ml.hpp"
#include "msspeech/rng.hpp"

using namespace msspeech;

namespace {

ModelVector noise_vector(Rng& rng) {
    ModelVector v;
    for (auto& x : v) x = rng.normal(0.0, 1.0);
    v[kModelVectorAgeIndex] = rng.uniform(25.0, 65.0);
    v[kModelVectorGenderIndex] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    return v;
}

// two Gaussian clouds shifted by `effect` on the first three coordinates
Dataset gaussian_dataset(std::size_t n_case, std::size_t n_control, double effect,
                         std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    for (std::size_t i = 0; i < n_case + n_control; ++i) {
        const bool is_case = i < n_case;
        ModelVector v = noise_vector(rng);
        if (is_case) {
            v[0] += effect;
            v[1] += effect;
            v[2] += effect;
        }
        ds.rows.push_back({(is_case ? "case_" : "ctrl_") + std::to_string(i),
                           is_case ? Label::Case : Label::Control, v});
    }
    return ds;
}

double brute_force_auc(const std::vector<double>& scores, const std::vector<Label>& labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != Label::Case) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != Label::Control) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

}  // namespace

TEST_SUITE("ml") {

TEST_CASE("stratified split at study scale") {
    const Dataset ds = gaussian_dataset(65, 66, 0.0, 5);
    const auto [train, holdout] = stratified_split(ds, 0.2, 42);
    std::size_t hold_cases = 0, hold_controls = 0;
    for (const auto& r : holdout.rows) {
        (r.label == Label::Case ? hold_cases : hold_controls)++;
    }
    CHECK(std::llabs(static_cast<long long>(hold_cases) - 13) <= 1);
    CHECK(std::llabs(static_cast<long long>(hold_controls) - 13) <= 1);
    CHECK(train.rows.size() + holdout.rows.size() == ds.rows.size());

    // same seed, same partition
    const auto [train2, holdout2] = stratified_split(ds, 0.2, 42);
    REQUIRE(train2.rows.size() == train.rows.size());
    for (std::size_t i = 0; i < train.rows.size(); ++i) {
        CHECK(train2.rows[i].subject_id == train.rows[i].subject_id);
    }
}

TEST_CASE("stratified split half-half and guards") {
    const Dataset ds = gaussian_dataset(4, 4, 0.0, 6);
    const auto [train, holdout] = stratified_split(ds, 0.5, 1);
    CHECK(train.rows.size() == 4);
    CHECK(holdout.rows.size() == 4);

    const Dataset tiny = gaussian_dataset(3, 30, 0.0, 7);
    CHECK_THROWS_AS(stratified_split(tiny, 0.2, 1), ContractError);
}

TEST_CASE("kfold partitions with balanced classes") {
    std::vector<Label> labels;
    for (int i = 0; i < 10; ++i) labels.push_back(i % 2 == 0 ? Label::Case : Label::Control);

    const auto folds = kfold_indices(labels, 5, 9);
    REQUIRE(folds.size() == 5);
    std::set<std::size_t> seen;
    for (const auto& fold : folds) {
        CHECK(fold.size() == 2);
        std::size_t cases = 0;
        for (std::size_t idx : fold) {
            CHECK(seen.insert(idx).second);  // pairwise disjoint
            if (labels[idx] == Label::Case) ++cases;
        }
        CHECK(cases == 1);
    }
    CHECK(seen.size() == labels.size());  // union covers everything

    const auto folds2 = kfold_indices(labels, 5, 9);
    CHECK(folds == folds2);

    std::vector<Label> skew(12, Label::Control);
    skew[0] = Label::Case;
    CHECK_THROWS_AS(kfold_indices(skew, 5, 1), ContractError);
}

TEST_CASE("roc auc basics") {
    const std::vector<double> separating = {0.9, 0.8, 0.2, 0.1};
    const std::vector<Label> labels = {Label::Case, Label::Case, Label::Control,
                                       Label::Control};
    CHECK(roc_auc(separating, labels) == 1.0);

    const std::vector<double> equal = {0.5, 0.5, 0.5, 0.5};
    CHECK(roc_auc(equal, labels) == 0.5);

    const std::vector<Label> single(4, Label::Case);
    CHECK_THROWS_AS(roc_auc(equal, single), ContractError);
}

TEST_CASE("roc auc equals the pairwise oracle on 200 seeded sets with ties") {
    Rng rng(123456);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 10 + rng.below(60);
        std::vector<double> scores(n);
        std::vector<Label> labels(n);
        bool has_case = false, has_control = false;
        for (std::size_t i = 0; i < n; ++i) {
            // coarse grid forces plenty of ties
            scores[i] = std::floor(rng.uniform(0.0, 8.0)) / 8.0;
            labels[i] = rng.bernoulli(0.5) ? Label::Case : Label::Control;
            (labels[i] == Label::Case ? has_case : has_control) = true;
        }
        if (!has_case || !has_control) continue;
        CHECK(std::fabs(roc_auc(scores, labels) - brute_force_auc(scores, labels)) <= 1e-12);

        // antisymmetry and monotone invariance (exact, rank based)
        std::vector<double> neg(scores);
        for (auto& s : neg) s = -s;
        CHECK(roc_auc(scores, labels) == doctest::Approx(1.0 - roc_auc(neg, labels))
                                             .epsilon(1e-15));
        std::vector<double> warped(scores);
        for (auto& s : warped) s = std::exp(3.0 * s);
        CHECK(roc_auc(warped, labels) == roc_auc(scores, labels));
    }
}

TEST_CASE("fit_predict sanity per model") {
    const Dataset train = gaussian_dataset(40, 40, 2.5, 77);

    SUBCASE("random forest memorizes separable training data") {
        std::vector<ModelVector> vectors;
        for (const auto& r : train.rows) vectors.push_back(r.vector);
        const auto scores = fit_predict("random_forest", train, vectors, 1);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const bool pred = scores[i] >= 0.5;
            if (pred == (train.rows[i].label == Label::Case)) ++correct;
        }
        CHECK(static_cast<double>(correct) >= 0.95 * static_cast<double>(scores.size()));
    }

    SUBCASE("knn at an exact training point echoes its label") {
        const auto scores =
            fit_predict("knn", train, std::vector<ModelVector>{train.rows[0].vector}, 1);
        const double want = train.rows[0].label == Label::Case ? 1.0 : 0.0;
        CHECK(std::fabs(scores[0] - want) <= 1e-6);
    }

    SUBCASE("unknown model spec") {
        CHECK_THROWS_AS(fit_predict("svm_rbf", train, {}, 1), ConfigError);
        CHECK_THROWS_AS(fit_predict("nope", train, {}, 1), ConfigError);
    }
}

TEST_CASE("label-permuted logistic stays near chance") {
    Rng perm_rng(31337);
    double auc_sum = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
        Dataset ds = gaussian_dataset(30, 30, 2.0, 4000 + seed);
        std::vector<Label> labels;
        for (const auto& r : ds.rows) labels.push_back(r.label);
        perm_rng.shuffle(labels);
        for (std::size_t i = 0; i < ds.rows.size(); ++i) ds.rows[i].label = labels[i];

        const auto [train, holdout] = stratified_split(ds, 0.2, seed);
        std::vector<ModelVector> hx;
        std::vector<Label> hy;
        for (const auto& r : holdout.rows) {
            hx.push_back(r.vector);
            hy.push_back(r.label);
        }
        const auto scores = fit_predict("logistic_regularized", train, hx,
                                        static_cast<std::uint64_t>(seed));
        auc_sum += roc_auc(scores, hy);
    }
    const double mean_auc = auc_sum / 20.0;
    CHECK(mean_auc >= 0.38);
    CHECK(mean_auc <= 0.62);
}

TEST_CASE("train_eval_suite on a separable cloud") {
    const Dataset ds = gaussian_dataset(40, 40, 2.5, 99);
    CVConfig cfg;
    cfg.seed = 7;
    const auto reports = train_eval_suite(ds, cfg, default_model_specs());
    REQUIRE(reports.size() == 4);

    // best-ranked first; on this data the winner should be excellent
    CHECK(reports[0].accuracy >= 0.9);
    CHECK(reports[0].mean_auc >= 0.9);
    for (const auto& r : reports) {
        CHECK(r.per_fold_auc.size() == 5);
        CHECK(r.accuracy >= 0.0);
        CHECK(r.accuracy <= 1.0);
        CHECK(r.sensitivity >= 0.0);
        CHECK(r.specificity <= 1.0);
    }

    // determinism: identical reports for identical (dataset, seed)
    const auto again = train_eval_suite(ds, cfg, default_model_specs());
    REQUIRE(again.size() == reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        CHECK(again[i].model_name == reports[i].model_name);
        CHECK(again[i].accuracy == reports[i].accuracy);
        CHECK(again[i].mean_auc == reports[i].mean_auc);
        CHECK(again[i].per_fold_auc == reports[i].per_fold_auc);
    }
}

TEST_CASE("z-scoring uses training statistics only") {
    // If evaluation vectors were standardized with their own batch statistics,
    // rescaling the whole evaluation batch would be undone and the scores
    // (hence AUC) would be unchanged. With train-fitted statistics the scores
    // must move.
    const Dataset ds = gaussian_dataset(30, 30, 1.5, 321);
    const auto [train, holdout] = stratified_split(ds, 0.2, 5);
    std::vector<ModelVector> hx;
    std::vector<Label> hy;
    for (const auto& r : holdout.rows) {
        hx.push_back(r.vector);
        hy.push_back(r.label);
    }
    const auto base = fit_predict("logistic_regularized", train, hx, 5);

    std::vector<ModelVector> rescaled(hx);
    for (auto& v : rescaled) {
        for (auto& x : v) x *= 10.0;
    }
    const auto scores = fit_predict("logistic_regularized", train, rescaled, 5);
    double max_change = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        max_change = std::max(max_change, std::fabs(scores[i] - base[i]));
    }
    CHECK(max_change > 1e-3);
}

}  // TEST_SUITE
