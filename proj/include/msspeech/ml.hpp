#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msspeech/features.hpp"

namespace msspeech {

enum class Label { Control = 0, Case = 1 };

struct DataRow {
    std::string subject_id;
    Label label = Label::Control;
    ModelVector vector{};
};

struct Dataset {
    std::vector<DataRow> rows;

    // enforces unique ids, both labels present, finite components
    void validate() const;
};

struct CVConfig {
    std::uint64_t seed = 0;
    int n_folds = 5;
    double holdout_fraction = 0.2;
    bool stratified = true;
};

struct ModelReport {
    std::string model_name;
    double accuracy = 0.0;
    double sensitivity = 0.0;  // recall on Case
    double specificity = 0.0;  // recall on Control
    double mean_auc = 0.0;     // mean over CV folds on the training portion
    std::vector<double> per_fold_auc;
};

// required model battery; svm_rbf / mlp intentionally not implemented
const std::vector<std::string>& default_model_specs();
bool is_known_model_spec(const std::string& spec);

// Per-class proportional split by seeded shuffle; deterministic per seed.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double fraction,
                                             std::uint64_t seed);

// k disjoint stratified folds over row indices; per-fold class counts within
// one of the proportional share.
std::vector<std::vector<std::size_t>> kfold_indices(std::span<const Label> labels, int k,
                                                    std::uint64_t seed);

// Rank-based (Mann-Whitney) AUC: P(score_case > score_control) + 0.5 P(tie).
double roc_auc(std::span<const double> scores, std::span<const Label> labels);

// Trains `model_spec` on `train` and returns a probability-like Case score for
// each test vector. Features are z-scored with training statistics only.
std::vector<double> fit_predict(const std::string& model_spec, const Dataset& train,
                                std::span<const ModelVector> test_vectors, std::uint64_t seed);

// The full protocol: stratified holdout split, per-model 5-fold CV AUC on the
// training portion, refit and holdout metrics at threshold 0.5. Models are
// ranked by the sum of their accuracy rank and AUC rank, best first.
std::vector<ModelReport> train_eval_suite(const Dataset& ds, const CVConfig& cfg,
                                          std::span<const std::string> models);

}  // namespace msspeech
