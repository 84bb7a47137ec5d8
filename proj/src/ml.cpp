#include "msspeech/ml.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "msspeech/error.hpp"
#include "msspeech/rng.hpp"

namespace msspeech {

namespace {

constexpr std::size_t kDim = std::tuple_size<ModelVector>::value;

std::uint64_t derive_seed(std::uint64_t base, const std::string& tag) {
    return Rng(base).derive(tag).next_u64();
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    return Rng(base).derive(tag).next_u64();
}

// z-scoring with training statistics only
struct Standardizer {
    std::array<double, kDim> mean{};
    std::array<double, kDim> sd{};

    static Standardizer fit(std::span<const DataRow> rows) {
        Standardizer s;
        const double n = static_cast<double>(rows.size());
        for (std::size_t j = 0; j < kDim; ++j) {
            double m = 0.0;
            for (const auto& r : rows) m += r.vector[j];
            m /= n;
            double ss = 0.0;
            for (const auto& r : rows) ss += (r.vector[j] - m) * (r.vector[j] - m);
            const double dev = rows.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
            s.mean[j] = m;
            s.sd[j] = dev > 0.0 ? dev : 1.0;
        }
        return s;
    }

    ModelVector apply(const ModelVector& v) const {
        ModelVector out;
        for (std::size_t j = 0; j < kDim; ++j) out[j] = (v[j] - mean[j]) / sd[j];
        return out;
    }
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---------------------------------------------------------------------------
// k nearest neighbors (k = 5, inverse-distance vote)

std::vector<double> knn_predict(const std::vector<ModelVector>& train_x,
                                const std::vector<int>& train_y,
                                std::span<const ModelVector> test_x) {
    const std::size_t k = std::min<std::size_t>(5, train_x.size());
    std::vector<double> scores;
    scores.reserve(test_x.size());
    std::vector<std::pair<double, std::size_t>> dist(train_x.size());
    for (const auto& q : test_x) {
        for (std::size_t i = 0; i < train_x.size(); ++i) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < kDim; ++j) {
                const double d = train_x[i][j] - q[j];
                d2 += d * d;
            }
            dist[i] = {std::sqrt(d2), i};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                          dist.end());
        double wsum = 0.0, wcase = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double w = 1.0 / (dist[i].first + 1e-9);
            wsum += w;
            if (train_y[dist[i].second] == 1) wcase += w;
        }
        scores.push_back(wcase / wsum);
    }
    return scores;
}

// ---------------------------------------------------------------------------
// random forest (500 trees, sqrt(p) features per split, unlimited depth)

struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_prob = 0.0;
};

class DecisionTree {
public:
    void fit(const std::vector<ModelVector>& x, const std::vector<int>& y,
             std::vector<std::size_t> idx, std::size_t mtry, Rng& rng) {
        nodes_.clear();
        build(x, y, std::move(idx), mtry, rng);
    }

    double predict(const ModelVector& v) const {
        int node = 0;
        while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
            const TreeNode& n = nodes_[static_cast<std::size_t>(node)];
            node = v[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
        }
        return nodes_[static_cast<std::size_t>(node)].leaf_prob;
    }

private:
    int build(const std::vector<ModelVector>& x, const std::vector<int>& y,
              std::vector<std::size_t> idx, std::size_t mtry, Rng& rng) {
        const int node_id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        std::size_t n_case = 0;
        for (std::size_t i : idx) n_case += static_cast<std::size_t>(y[i]);
        const std::size_t n = idx.size();
        const double prob = static_cast<double>(n_case) / static_cast<double>(n);
        if (n < 2 || n_case == 0 || n_case == n) {
            nodes_[static_cast<std::size_t>(node_id)].leaf_prob = prob;
            return node_id;
        }

        // sample mtry distinct features
        std::array<std::size_t, kDim> features;
        for (std::size_t j = 0; j < kDim; ++j) features[j] = j;
        for (std::size_t j = 0; j < mtry; ++j) {
            const std::size_t pick = j + static_cast<std::size_t>(rng.below(kDim - j));
            std::swap(features[j], features[pick]);
        }

        const double parent_gini =
            1.0 - prob * prob - (1.0 - prob) * (1.0 - prob);
        double best_gain = 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;

        std::vector<std::size_t> order(idx);
        for (std::size_t fi = 0; fi < mtry; ++fi) {
            const std::size_t f = features[fi];
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return x[a][f] < x[b][f];
            });
            std::size_t left_case = 0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_case += static_cast<std::size_t>(y[order[i]]);
                if (x[order[i]][f] == x[order[i + 1]][f]) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = static_cast<double>(n - i - 1);
                const double pl = static_cast<double>(left_case) / nl;
                const double pr = static_cast<double>(n_case - left_case) / nr;
                const double gini = (nl * (1.0 - pl * pl - (1.0 - pl) * (1.0 - pl)) +
                                     nr * (1.0 - pr * pr - (1.0 - pr) * (1.0 - pr))) /
                                    static_cast<double>(n);
                const double gain = parent_gini - gini;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (x[order[i]][f] + x[order[i + 1]][f]);
                }
            }
        }

        if (best_feature < 0) {
            nodes_[static_cast<std::size_t>(node_id)].leaf_prob = prob;
            return node_id;
        }

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx) {
            if (x[i][static_cast<std::size_t>(best_feature)] < best_threshold) {
                left_idx.push_back(i);
            } else {
                right_idx.push_back(i);
            }
        }
        if (left_idx.empty() || right_idx.empty()) {
            nodes_[static_cast<std::size_t>(node_id)].leaf_prob = prob;
            return node_id;
        }

        nodes_[static_cast<std::size_t>(node_id)].feature = best_feature;
        nodes_[static_cast<std::size_t>(node_id)].threshold = best_threshold;
        const int l = build(x, y, std::move(left_idx), mtry, rng);
        const int r = build(x, y, std::move(right_idx), mtry, rng);
        nodes_[static_cast<std::size_t>(node_id)].left = l;
        nodes_[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }

    std::vector<TreeNode> nodes_;
};

std::vector<double> random_forest_predict(const std::vector<ModelVector>& train_x,
                                          const std::vector<int>& train_y,
                                          std::span<const ModelVector> test_x,
                                          std::uint64_t seed) {
    constexpr int n_trees = 500;
    const std::size_t n = train_x.size();
    const std::size_t mtry =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(kDim))));

    std::vector<double> scores(test_x.size(), 0.0);
    DecisionTree tree;
    for (int t = 0; t < n_trees; ++t) {
        Rng rng = Rng(seed).derive(static_cast<std::uint64_t>(t));
        std::vector<std::size_t> boot(n);
        for (auto& b : boot) b = static_cast<std::size_t>(rng.below(n));
        tree.fit(train_x, train_y, std::move(boot), mtry, rng);
        for (std::size_t i = 0; i < test_x.size(); ++i) scores[i] += tree.predict(test_x[i]);
    }
    for (auto& s : scores) s /= static_cast<double>(n_trees);
    return scores;
}

// ---------------------------------------------------------------------------
// L2 logistic regression (IRLS), lambda picked by inner 3-fold CV

std::vector<double> ridge_logistic_fit(const std::vector<ModelVector>& x,
                                       const std::vector<int>& y, double lambda) {
    const std::size_t n = x.size();
    const std::size_t dim = kDim + 1;  // intercept first
    std::vector<double> beta(dim, 0.0);
    std::vector<std::vector<double>> a(dim, std::vector<double>(dim));
    std::vector<double> rhs(dim);

    for (int iter = 0; iter < 50; ++iter) {
        for (auto& row : a) std::fill(row.begin(), row.end(), 0.0);
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double eta = beta[0];
            for (std::size_t j = 0; j < kDim; ++j) eta += beta[j + 1] * x[i][j];
            const double mu = sigmoid(eta);
            const double w = std::max(mu * (1.0 - mu), 1e-12);
            const double z = eta + (static_cast<double>(y[i]) - mu) / w;
            for (std::size_t aj = 0; aj < dim; ++aj) {
                const double xa = aj == 0 ? 1.0 : x[i][aj - 1];
                rhs[aj] += w * xa * z;
                for (std::size_t bj = 0; bj <= aj; ++bj) {
                    a[aj][bj] += w * xa * (bj == 0 ? 1.0 : x[i][bj - 1]);
                }
            }
        }
        for (std::size_t j = 1; j < dim; ++j) a[j][j] += lambda;  // no penalty on intercept
        a[0][0] += 1e-10;
        for (std::size_t aj = 0; aj < dim; ++aj) {
            for (std::size_t bj = aj + 1; bj < dim; ++bj) a[aj][bj] = a[bj][aj];
        }

        // Cholesky solve
        bool ok = true;
        for (std::size_t i = 0; i < dim && ok; ++i) {
            for (std::size_t j = i; j < dim; ++j) {
                double sum = a[i][j];
                for (std::size_t k = 0; k < i; ++k) sum -= a[i][k] * a[j][k];
                if (i == j) {
                    if (!(sum > 0.0)) {
                        ok = false;
                        break;
                    }
                    a[i][i] = std::sqrt(sum);
                } else {
                    a[j][i] = sum / a[i][i];
                }
            }
        }
        if (!ok) break;
        for (std::size_t i = 0; i < dim; ++i) {
            double sum = rhs[i];
            for (std::size_t k = 0; k < i; ++k) sum -= a[i][k] * rhs[k];
            rhs[i] = sum / a[i][i];
        }
        for (std::size_t i = dim; i-- > 0;) {
            double sum = rhs[i];
            for (std::size_t k = i + 1; k < dim; ++k) sum -= a[k][i] * rhs[k];
            rhs[i] = sum / a[i][i];
        }
        double max_delta = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            max_delta = std::max(max_delta, std::fabs(rhs[j] - beta[j]));
        }
        beta = rhs;
        if (max_delta < 1e-8) break;
    }
    return beta;
}

std::vector<double> logistic_scores(const std::vector<double>& beta,
                                    std::span<const ModelVector> x) {
    std::vector<double> out;
    out.reserve(x.size());
    for (const auto& v : x) {
        double eta = beta[0];
        for (std::size_t j = 0; j < kDim; ++j) eta += beta[j + 1] * v[j];
        out.push_back(sigmoid(eta));
    }
    return out;
}

double auc_of(const std::vector<double>& scores, const std::vector<int>& y);

std::vector<double> logistic_regularized_predict(const std::vector<ModelVector>& train_x,
                                                 const std::vector<int>& train_y,
                                                 std::span<const ModelVector> test_x,
                                                 std::uint64_t seed) {
    static const double lambda_grid[] = {0.001, 0.01, 0.1, 1.0};

    // inner 3-fold stratified CV over the lambda grid
    std::vector<Label> labels(train_y.size());
    for (std::size_t i = 0; i < train_y.size(); ++i) {
        labels[i] = train_y[i] == 1 ? Label::Case : Label::Control;
    }
    double best_lambda = 1.0;
    double best_auc = -1.0;
    std::size_t min_class = train_y.size();
    {
        std::size_t n_case = 0;
        for (int v : train_y) n_case += static_cast<std::size_t>(v);
        min_class = std::min(n_case, train_y.size() - n_case);
    }
    if (min_class >= 3) {
        const auto folds = kfold_indices(labels, 3, derive_seed(seed, "lambda_cv"));
        for (double lambda : lambda_grid) {
            double auc_sum = 0.0;
            int n_eval = 0;
            for (const auto& fold : folds) {
                std::set<std::size_t> in_fold(fold.begin(), fold.end());
                std::vector<ModelVector> fx;
                std::vector<int> fy;
                std::vector<ModelVector> tx;
                std::vector<int> ty;
                for (std::size_t i = 0; i < train_x.size(); ++i) {
                    if (in_fold.count(i)) {
                        tx.push_back(train_x[i]);
                        ty.push_back(train_y[i]);
                    } else {
                        fx.push_back(train_x[i]);
                        fy.push_back(train_y[i]);
                    }
                }
                bool both = false;
                for (std::size_t i = 1; i < ty.size(); ++i) both |= ty[i] != ty[0];
                if (!both) continue;
                const auto beta = ridge_logistic_fit(fx, fy, lambda);
                auc_sum += auc_of(logistic_scores(beta, tx), ty);
                ++n_eval;
            }
            const double mean = n_eval > 0 ? auc_sum / n_eval : 0.0;
            if (mean > best_auc + 1e-12) {
                best_auc = mean;
                best_lambda = lambda;
            } else if (std::fabs(mean - best_auc) <= 1e-12 && lambda > best_lambda) {
                best_lambda = lambda;  // prefer the stronger penalty on ties
            }
        }
    }

    const auto beta = ridge_logistic_fit(train_x, train_y, best_lambda);
    return logistic_scores(beta, test_x);
}

// ---------------------------------------------------------------------------
// gradient boosting (depth-2 regression trees on logistic loss)

struct BoostNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

class BoostTree {
public:
    void fit(const std::vector<ModelVector>& x, const std::vector<double>& grad,
             const std::vector<double>& hess, const std::vector<std::size_t>& idx) {
        nodes_.clear();
        build(x, grad, hess, idx, 0);
    }

    double value_for(const ModelVector& v) const {
        int node = 0;
        while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
            const BoostNode& n = nodes_[static_cast<std::size_t>(node)];
            node = v[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
        }
        return nodes_[static_cast<std::size_t>(node)].value;
    }

private:
    int build(const std::vector<ModelVector>& x, const std::vector<double>& grad,
              const std::vector<double>& hess, const std::vector<std::size_t>& idx,
              int depth) {
        const int node_id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        double gsum = 0.0, hsum = 0.0;
        for (std::size_t i : idx) {
            gsum += grad[i];
            hsum += hess[i];
        }
        const double leaf = std::clamp(gsum / (hsum + 1e-12), -4.0, 4.0);

        if (depth >= 2 || idx.size() < 2) {
            nodes_[static_cast<std::size_t>(node_id)].value = leaf;
            return node_id;
        }

        double best_gain = 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;
        const double parent_score = gsum * gsum / (hsum + 1e-12);
        std::vector<std::size_t> order(idx);
        for (std::size_t f = 0; f < kDim; ++f) {
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return x[a][f] < x[b][f];
            });
            double gl = 0.0, hl = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                gl += grad[order[i]];
                hl += hess[order[i]];
                if (x[order[i]][f] == x[order[i + 1]][f]) continue;
                const double gr = gsum - gl;
                const double hr = hsum - hl;
                const double gain =
                    gl * gl / (hl + 1e-12) + gr * gr / (hr + 1e-12) - parent_score;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (x[order[i]][f] + x[order[i + 1]][f]);
                }
            }
        }

        if (best_feature < 0) {
            nodes_[static_cast<std::size_t>(node_id)].value = leaf;
            return node_id;
        }
        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx) {
            if (x[i][static_cast<std::size_t>(best_feature)] < best_threshold) {
                left_idx.push_back(i);
            } else {
                right_idx.push_back(i);
            }
        }
        if (left_idx.empty() || right_idx.empty()) {
            nodes_[static_cast<std::size_t>(node_id)].value = leaf;
            return node_id;
        }
        nodes_[static_cast<std::size_t>(node_id)].feature = best_feature;
        nodes_[static_cast<std::size_t>(node_id)].threshold = best_threshold;
        const int l = build(x, grad, hess, left_idx, depth + 1);
        const int r = build(x, grad, hess, right_idx, depth + 1);
        nodes_[static_cast<std::size_t>(node_id)].left = l;
        nodes_[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }

    std::vector<BoostNode> nodes_;
};

std::vector<double> gradient_boosting_predict(const std::vector<ModelVector>& train_x,
                                              const std::vector<int>& train_y,
                                              std::span<const ModelVector> test_x) {
    constexpr int n_rounds = 200;
    constexpr double learning_rate = 0.1;
    const std::size_t n = train_x.size();

    double pbar = 0.0;
    for (int v : train_y) pbar += v;
    pbar = std::clamp(pbar / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
    const double f0 = std::log(pbar / (1.0 - pbar));

    std::vector<double> f_train(n, f0);
    std::vector<double> f_test(test_x.size(), f0);
    std::vector<double> grad(n), hess(n);
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;

    BoostTree tree;
    for (int round = 0; round < n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(f_train[i]);
            grad[i] = static_cast<double>(train_y[i]) - p;
            hess[i] = std::max(p * (1.0 - p), 1e-12);
        }
        tree.fit(train_x, grad, hess, all);
        for (std::size_t i = 0; i < n; ++i) {
            f_train[i] += learning_rate * tree.value_for(train_x[i]);
        }
        for (std::size_t i = 0; i < test_x.size(); ++i) {
            f_test[i] += learning_rate * tree.value_for(test_x[i]);
        }
    }
    std::vector<double> scores(test_x.size());
    for (std::size_t i = 0; i < test_x.size(); ++i) scores[i] = sigmoid(f_test[i]);
    return scores;
}

double auc_of(const std::vector<double>& scores, const std::vector<int>& y) {
    std::vector<Label> labels(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        labels[i] = y[i] == 1 ? Label::Case : Label::Control;
    }
    return roc_auc(scores, labels);
}

}  // namespace

// ---------------------------------------------------------------------------
// public interface

void Dataset::validate() const {
    std::set<std::string> ids;
    bool has_case = false, has_control = false;
    for (const auto& r : rows) {
        if (!ids.insert(r.subject_id).second) {
            throw ContractError("dataset: duplicate subject id '" + r.subject_id + "'");
        }
        has_case |= r.label == Label::Case;
        has_control |= r.label == Label::Control;
        for (double v : r.vector) {
            if (!std::isfinite(v)) {
                throw ContractError("dataset: non-finite feature for '" + r.subject_id + "'");
            }
        }
    }
    if (!has_case || !has_control) {
        throw ContractError("dataset: both Case and Control labels required");
    }
}

const std::vector<std::string>& default_model_specs() {
    static const std::vector<std::string> specs = {"knn", "random_forest",
                                                   "logistic_regularized", "gradient_boosting"};
    return specs;
}

bool is_known_model_spec(const std::string& spec) {
    const auto& specs = default_model_specs();
    return std::find(specs.begin(), specs.end(), spec) != specs.end();
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double fraction,
                                             std::uint64_t seed) {
    if (!(fraction > 0.0) || !(fraction < 1.0)) {
        throw ContractError("stratified_split: fraction must be in (0, 1)");
    }
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
        by_class[ds.rows[i].label == Label::Case ? 1 : 0].push_back(i);
    }
    for (int c = 0; c < 2; ++c) {
        if (static_cast<double>(by_class[c].size()) < 2.0 / fraction) {
            throw ContractError("stratified_split: class too small for requested fraction");
        }
    }

    Dataset train, holdout;
    for (int c = 0; c < 2; ++c) {
        Rng rng = Rng(seed).derive("split").derive(static_cast<std::uint64_t>(c));
        rng.shuffle(by_class[c]);
        const std::size_t n_hold = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(by_class[c].size())));
        for (std::size_t i = 0; i < by_class[c].size(); ++i) {
            (i < n_hold ? holdout : train).rows.push_back(ds.rows[by_class[c][i]]);
        }
    }
    // keep original dataset order within each part so output is reproducible
    auto by_original = [&ds](const DataRow& a, const DataRow& b) {
        auto pos = [&ds](const DataRow& r) {
            for (std::size_t i = 0; i < ds.rows.size(); ++i) {
                if (ds.rows[i].subject_id == r.subject_id) return i;
            }
            return ds.rows.size();
        };
        return pos(a) < pos(b);
    };
    std::sort(train.rows.begin(), train.rows.end(), by_original);
    std::sort(holdout.rows.begin(), holdout.rows.end(), by_original);
    return {std::move(train), std::move(holdout)};
}

std::vector<std::vector<std::size_t>> kfold_indices(std::span<const Label> labels, int k,
                                                    std::uint64_t seed) {
    if (k < 2) throw ContractError("kfold_indices: k must be >= 2");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        by_class[labels[i] == Label::Case ? 1 : 0].push_back(i);
    }
    for (int c = 0; c < 2; ++c) {
        if (by_class[c].size() < static_cast<std::size_t>(k)) {
            throw ContractError("kfold_indices: class smaller than k");
        }
    }
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    for (int c = 0; c < 2; ++c) {
        Rng rng = Rng(seed).derive("kfold").derive(static_cast<std::uint64_t>(c));
        rng.shuffle(by_class[c]);
        for (std::size_t i = 0; i < by_class[c].size(); ++i) {
            folds[i % static_cast<std::size_t>(k)].push_back(by_class[c][i]);
        }
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

double roc_auc(std::span<const double> scores, std::span<const Label> labels) {
    if (scores.size() != labels.size()) throw ContractError("roc_auc: size mismatch");
    const std::size_t n = scores.size();
    std::size_t n_case = 0;
    for (Label l : labels) n_case += l == Label::Case ? 1 : 0;
    const std::size_t n_control = n - n_case;
    if (n_case == 0 || n_control == 0) {
        throw ContractError("roc_auc: both classes required");
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_case = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // average 1-based rank
        for (std::size_t t = i; t < j; ++t) {
            if (labels[order[t]] == Label::Case) rank_sum_case += midrank;
        }
        i = j;
    }
    const double u = rank_sum_case - static_cast<double>(n_case) *
                                         (static_cast<double>(n_case) + 1.0) / 2.0;
    return u / (static_cast<double>(n_case) * static_cast<double>(n_control));
}

std::vector<double> fit_predict(const std::string& model_spec, const Dataset& train,
                                std::span<const ModelVector> test_vectors, std::uint64_t seed) {
    if (!is_known_model_spec(model_spec)) {
        throw ConfigError("unknown model spec: " + model_spec);
    }
    train.validate();

    const Standardizer std_fit = Standardizer::fit(train.rows);
    std::vector<ModelVector> train_x;
    std::vector<int> train_y;
    train_x.reserve(train.rows.size());
    for (const auto& r : train.rows) {
        train_x.push_back(std_fit.apply(r.vector));
        train_y.push_back(r.label == Label::Case ? 1 : 0);
    }
    std::vector<ModelVector> test_x;
    test_x.reserve(test_vectors.size());
    for (const auto& v : test_vectors) test_x.push_back(std_fit.apply(v));

    if (model_spec == "knn") return knn_predict(train_x, train_y, test_x);
    if (model_spec == "random_forest") {
        return random_forest_predict(train_x, train_y, test_x, derive_seed(seed, "rf"));
    }
    if (model_spec == "logistic_regularized") {
        return logistic_regularized_predict(train_x, train_y, test_x,
                                            derive_seed(seed, "logistic"));
    }
    return gradient_boosting_predict(train_x, train_y, test_x);
}

std::vector<ModelReport> train_eval_suite(const Dataset& ds, const CVConfig& cfg,
                                          std::span<const std::string> models) {
    ds.validate();
    if (cfg.n_folds < 2) throw ContractError("train_eval_suite: n_folds must be >= 2");
    if (!(cfg.holdout_fraction > 0.0) || !(cfg.holdout_fraction < 0.5)) {
        throw ContractError("train_eval_suite: holdout_fraction must be in (0, 0.5)");
    }
    for (const auto& m : models) {
        if (!is_known_model_spec(m)) throw ConfigError("unknown model spec: " + m);
    }

    const auto [train, holdout] = stratified_split(ds, cfg.holdout_fraction, cfg.seed);

    std::vector<Label> train_labels;
    train_labels.reserve(train.rows.size());
    for (const auto& r : train.rows) train_labels.push_back(r.label);
    const auto folds =
        kfold_indices(train_labels, cfg.n_folds, derive_seed(cfg.seed, "folds"));

    std::vector<ModelReport> reports;
    for (const auto& model : models) {
        ModelReport rep;
        rep.model_name = model;

        for (std::size_t f = 0; f < folds.size(); ++f) {
            std::set<std::size_t> in_fold(folds[f].begin(), folds[f].end());
            Dataset fold_train;
            std::vector<ModelVector> fold_test_x;
            std::vector<Label> fold_test_y;
            for (std::size_t i = 0; i < train.rows.size(); ++i) {
                if (in_fold.count(i)) {
                    fold_test_x.push_back(train.rows[i].vector);
                    fold_test_y.push_back(train.rows[i].label);
                } else {
                    fold_train.rows.push_back(train.rows[i]);
                }
            }
            const std::uint64_t fold_seed =
                derive_seed(derive_seed(cfg.seed, model), static_cast<std::uint64_t>(f));
            const auto scores = fit_predict(model, fold_train, fold_test_x, fold_seed);
            rep.per_fold_auc.push_back(roc_auc(scores, fold_test_y));
        }
        double auc_sum = 0.0;
        for (double a : rep.per_fold_auc) auc_sum += a;
        rep.mean_auc = auc_sum / static_cast<double>(rep.per_fold_auc.size());

        std::vector<ModelVector> holdout_x;
        holdout_x.reserve(holdout.rows.size());
        for (const auto& r : holdout.rows) holdout_x.push_back(r.vector);
        const auto scores =
            fit_predict(model, train, holdout_x, derive_seed(derive_seed(cfg.seed, model),
                                                             "final"));
        std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < holdout.rows.size(); ++i) {
            const bool pred_case = scores[i] >= 0.5;
            const bool is_case = holdout.rows[i].label == Label::Case;
            if (pred_case && is_case) ++tp;
            else if (pred_case && !is_case) ++fp;
            else if (!pred_case && is_case) ++fn;
            else ++tn;
        }
        rep.accuracy = static_cast<double>(tp + tn) / static_cast<double>(holdout.rows.size());
        rep.sensitivity = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                                      : 0.0;
        rep.specificity = tn + fp > 0 ? static_cast<double>(tn) / static_cast<double>(tn + fp)
                                      : 0.0;
        reports.push_back(std::move(rep));
    }

    // rank by accuracy and AUC; best combined rank first
    auto rank_of = [&reports](auto key) {
        std::vector<std::size_t> rank(reports.size());
        for (std::size_t i = 0; i < reports.size(); ++i) {
            std::size_t better = 0;
            for (std::size_t j = 0; j < reports.size(); ++j) {
                if (key(reports[j]) > key(reports[i])) ++better;
            }
            rank[i] = better + 1;
        }
        return rank;
    };
    const auto acc_rank = rank_of([](const ModelReport& r) { return r.accuracy; });
    const auto auc_rank = rank_of([](const ModelReport& r) { return r.mean_auc; });
    std::vector<std::size_t> order(reports.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const std::size_t ca = acc_rank[a] + auc_rank[a];
        const std::size_t cb = acc_rank[b] + auc_rank[b];
        if (ca != cb) return ca < cb;
        if (reports[a].mean_auc != reports[b].mean_auc) {
            return reports[a].mean_auc > reports[b].mean_auc;
        }
        return reports[a].model_name < reports[b].model_name;
    });
    std::vector<ModelReport> sorted;
    sorted.reserve(reports.size());
    for (std::size_t i : order) sorted.push_back(std::move(reports[i]));
    return sorted;
}

}  // namespace msspeech
