#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagscope/common.hpp"
#include "tagscope/rng.hpp"
#include "tagscope/tabular.hpp"

namespace tagscope::gbdt {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;  // already scaled by the learning rate
    double cover = 0.0;       // hessian weight reaching the node
    double gain = 0.0;        // split gain at creation

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(const double* x) const {
        int n = 0;
        while (!nodes[static_cast<std::size_t>(n)].is_leaf()) {
            const TreeNode& node = nodes[static_cast<std::size_t>(n)];
            n = x[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right;
        }
        return nodes[static_cast<std::size_t>(n)].leaf_value;
    }

    double predict(const std::vector<double>& x) const { return predict(x.data()); }
};

struct TrainParams {
    int n_trees = 200;
    int max_depth = 6;
    double learning_rate = 0.1;
    double lambda = 1.0;
    double gamma = 0.0;
    double min_child_weight = 1.0;
    double subsample = 0.8;
    double colsample = 0.8;
    std::uint64_t seed = 42;
};

// One binary logistic booster per label; multiclass tasks use one-vs-rest
// with argmax.
struct BoostedModel {
    TrainParams params;
    tabular::TaskKind task_kind = tabular::TaskKind::Multilabel;
    std::vector<std::string> feature_names;
    std::vector<std::string> label_names;
    std::vector<double> base_scores;       // prior log-odds per label
    std::vector<std::vector<Tree>> forests;  // [label][tree]
    bool has_cover = true;

    // pipeline state carried in the model file
    tabular::StandardScaler scaler;  // empty mean = identity
    tabular::SplitSpec split;

    std::size_t n_features() const { return feature_names.size(); }
    std::size_t n_labels() const { return label_names.size(); }
    bool has_scaler() const { return !scaler.mean.empty(); }
};

struct TrainReport {
    std::vector<std::vector<double>> round_losses;  // [label][round], mean logistic loss
    std::vector<std::string> warnings;
};

struct Metrics {
    std::optional<double> macro_auc;
    std::vector<std::optional<double>> per_label_auc;
    std::optional<double> accuracy;
    std::vector<double> per_class_f1;
    std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]
    std::vector<std::string> excluded_labels;
};

// Second-order gain of a candidate split under the logistic objective.
inline double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma) {
    const double left = gl * gl / (hl + lambda);
    const double right = gr * gr / (hr + lambda);
    const double joint = (gl + gr) * (gl + gr) / (hl + hr + lambda);
    return 0.5 * (left + right - joint) - gamma;
}

inline double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

namespace detail {

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    double gl = 0.0, hl = 0.0, gr = 0.0, hr = 0.0;
};

struct BuildNode {
    double g = 0.0, h = 0.0;
    int depth = 0;
    SplitCandidate best;
};

// Exact greedy booster for one label. `sorted_idx` holds, per feature, the
// row indices ordered by (value, row); it is shared read-only across labels.
inline std::pair<std::vector<Tree>, std::vector<double>> build_booster(
    const Matrix& x, const std::vector<std::vector<int>>& sorted_idx, const std::vector<double>& y,
    double base_score, const TrainParams& p, std::uint64_t booster_seed) {
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;
    std::vector<double> margins(n, base_score);
    std::vector<double> g(n), h(n);
    std::vector<int> pos(n);
    std::vector<Tree> forest;
    std::vector<double> losses;
    forest.reserve(static_cast<std::size_t>(p.n_trees));

    for (int round = 0; round < p.n_trees; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            double prob = sigmoid(margins[i]);
            prob = std::clamp(prob, 1e-16, 1.0 - 1e-16);
            g[i] = prob - y[i];
            h[i] = prob * (1.0 - prob);
        }

        Rng rng(mix_seed(booster_seed, static_cast<std::uint64_t>(round)));
        Tree tree;
        std::vector<BuildNode> build;
        build.push_back({});
        double root_g = 0.0, root_h = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.next_unit() < p.subsample) {
                pos[i] = 0;
                root_g += g[i];
                root_h += h[i];
            } else {
                pos[i] = -1;
            }
        }
        build[0].g = root_g;
        build[0].h = root_h;
        tree.nodes.push_back({});

        // column subset for this tree, ascending so gain ties resolve to the
        // lowest feature index
        std::vector<int> columns(d);
        for (std::size_t f = 0; f < d; ++f) columns[f] = static_cast<int>(f);
        if (p.colsample < 1.0) {
            const std::size_t keep =
                std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(p.colsample * static_cast<double>(d))));
            for (std::size_t i = 0; i < keep; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng.next_below(d - i));
                std::swap(columns[i], columns[j]);
            }
            columns.resize(keep);
            std::sort(columns.begin(), columns.end());
        }

        int level_begin = 0;
        int level_end = 1;
        for (int depth = 0; depth < p.max_depth && level_begin < level_end; ++depth) {
            const int n_open = level_end - level_begin;

            // one pass per feature over its presorted order, accumulating
            // left-side stats per open node
            std::vector<double> acc_g(static_cast<std::size_t>(n_open));
            std::vector<double> acc_h(static_cast<std::size_t>(n_open));
            std::vector<int> acc_cnt(static_cast<std::size_t>(n_open));
            std::vector<double> last_val(static_cast<std::size_t>(n_open));
            for (int f : columns) {
                std::fill(acc_g.begin(), acc_g.end(), 0.0);
                std::fill(acc_h.begin(), acc_h.end(), 0.0);
                std::fill(acc_cnt.begin(), acc_cnt.end(), 0);
                for (int r : sorted_idx[static_cast<std::size_t>(f)]) {
                    const int nd = pos[static_cast<std::size_t>(r)];
                    if (nd < level_begin) continue;
                    const std::size_t s = static_cast<std::size_t>(nd - level_begin);
                    const double v = x.at(static_cast<std::size_t>(r), static_cast<std::size_t>(f));
                    BuildNode& node = build[static_cast<std::size_t>(nd)];
                    if (acc_cnt[s] > 0 && v > last_val[s]) {
                        const double hl = acc_h[s];
                        const double hr = node.h - acc_h[s];
                        if (hl >= p.min_child_weight && hr >= p.min_child_weight) {
                            const double gain =
                                split_gain(acc_g[s], hl, node.g - acc_g[s], hr, p.lambda, p.gamma);
                            if (gain > node.best.gain) {
                                node.best.gain = gain;
                                node.best.feature = f;
                                node.best.threshold = 0.5 * (last_val[s] + v);
                                node.best.gl = acc_g[s];
                                node.best.hl = hl;
                                node.best.gr = node.g - acc_g[s];
                                node.best.hr = hr;
                            }
                        }
                    }
                    acc_g[s] += g[static_cast<std::size_t>(r)];
                    acc_h[s] += h[static_cast<std::size_t>(r)];
                    ++acc_cnt[s];
                    last_val[s] = v;
                }
            }

            // apply the winning splits, creating the next level
            const int next_begin = level_end;
            std::vector<int> left_child(static_cast<std::size_t>(n_open), -1);
            for (int nd = level_begin; nd < level_end; ++nd) {
                const SplitCandidate best = build[static_cast<std::size_t>(nd)].best;
                if (best.feature < 0 || !(best.gain > 0.0)) continue;
                const int left = static_cast<int>(tree.nodes.size());
                {
                    TreeNode& tn = tree.nodes[static_cast<std::size_t>(nd)];
                    tn.feature = best.feature;
                    tn.threshold = best.threshold;
                    tn.gain = best.gain;
                    tn.left = left;
                    tn.right = left + 1;
                }
                left_child[static_cast<std::size_t>(nd - level_begin)] = left;
                tree.nodes.push_back({});
                tree.nodes.push_back({});
                build.push_back({best.gl, best.hl, depth + 1, {}});
                build.push_back({best.gr, best.hr, depth + 1, {}});
            }
            for (std::size_t i = 0; i < n; ++i) {
                const int nd = pos[i];
                if (nd < level_begin) continue;
                const int lc = left_child[static_cast<std::size_t>(nd - level_begin)];
                if (lc < 0) {
                    pos[i] = -1;  // node stayed a leaf
                    continue;
                }
                const TreeNode& tn = tree.nodes[static_cast<std::size_t>(nd)];
                pos[i] = x.at(i, static_cast<std::size_t>(tn.feature)) < tn.threshold ? lc : lc + 1;
            }
            level_begin = next_begin;
            level_end = static_cast<int>(tree.nodes.size());
        }

        // finalize leaves and rebuild covers bottom-up so that
        // cover(parent) == cover(left) + cover(right) holds exactly
        for (std::size_t i = tree.nodes.size(); i-- > 0;) {
            TreeNode& tn = tree.nodes[i];
            if (tn.is_leaf()) {
                tn.leaf_value = -p.learning_rate * build[i].g / (build[i].h + p.lambda);
                tn.cover = build[i].h;
            } else {
                tn.cover = tree.nodes[static_cast<std::size_t>(tn.left)].cover +
                           tree.nodes[static_cast<std::size_t>(tn.right)].cover;
            }
        }

        for (std::size_t i = 0; i < n; ++i) margins[i] += tree.predict(x.row(i));
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double prob = std::clamp(sigmoid(margins[i]), 1e-16, 1.0 - 1e-16);
            loss -= y[i] * std::log(prob) + (1.0 - y[i]) * std::log(1.0 - prob);
        }
        loss /= static_cast<double>(n);
        if (!std::isfinite(loss)) throw NumericFailure("non-finite training loss");
        losses.push_back(loss);
        forest.push_back(std::move(tree));
    }
    return {std::move(forest), std::move(losses)};
}

}  // namespace detail

// Train one booster per label. Deterministic for fixed (X, Y, params, seed)
// and independent of `jobs`: every label derives its own RNG stream.
inline std::pair<BoostedModel, TrainReport> train(const Matrix& x, const tabular::LabelMatrix& y,
                                                  const TrainParams& params,
                                                  const std::vector<std::string>& feature_names,
                                                  int jobs = 1) {
    if (x.rows != y.track_ids.size()) throw DimensionMismatch("feature/label row mismatch");
    if (feature_names.size() != x.cols) throw DimensionMismatch("feature name count mismatch");
    for (double v : x.data)
        if (!std::isfinite(v)) throw NumericFailure("non-finite feature value");

    const std::size_t n = x.rows;
    const std::size_t d = x.cols;
    const std::size_t n_labels = y.tag_names.size();

    // shared presort: row indices per feature ordered by (value, row)
    std::vector<std::vector<int>> sorted_idx(d);
    for (std::size_t f = 0; f < d; ++f) {
        auto& idx = sorted_idx[f];
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            const double va = x.at(static_cast<std::size_t>(a), f);
            const double vb = x.at(static_cast<std::size_t>(b), f);
            if (va != vb) return va < vb;
            return a < b;
        });
    }

    BoostedModel model;
    model.params = params;
    model.task_kind = y.task_kind;
    model.feature_names = feature_names;
    model.label_names = y.tag_names;
    model.base_scores.resize(n_labels);
    model.forests.resize(n_labels);

    TrainReport report;
    report.round_losses.resize(n_labels);
    std::vector<std::string> label_warnings(n_labels);

    auto run_label = [&](std::size_t label) {
        std::vector<double> col(n);
        std::size_t pos_count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            col[i] = y.indicators.at(i, label);
            if (col[i] == 1.0) ++pos_count;
        }
        const std::size_t neg_count = n - pos_count;
        double base;
        if (pos_count == 0 || neg_count == 0) {
            base = pos_count == 0 ? -10.0 : 10.0;
            label_warnings[label] = "label '" + y.tag_names[label] +
                                    "' has a single class; booster degenerates to base_score";
            model.base_scores[label] = base;
            return;  // no trees for a degenerate prior
        }
        base = std::clamp(std::log(static_cast<double>(pos_count) / static_cast<double>(neg_count)),
                          -10.0, 10.0);
        model.base_scores[label] = base;
        auto [forest, losses] =
            detail::build_booster(x, sorted_idx, col, base, params, mix_seed(params.seed, label));
        model.forests[label] = std::move(forest);
        report.round_losses[label] = std::move(losses);
    };

    if (jobs <= 1 || n_labels <= 1) {
        for (std::size_t label = 0; label < n_labels; ++label) run_label(label);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&, w] {
                try {
                    for (std::size_t label = next.fetch_add(1); label < n_labels;
                         label = next.fetch_add(1))
                        run_label(label);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& t : workers) t.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    for (auto& w : label_warnings)
        if (!w.empty()) report.warnings.push_back(w);
    return {std::move(model), std::move(report)};
}

// ---- prediction ---------------------------------------------------------------

inline std::vector<double> predict_margin(const BoostedModel& model, const std::vector<double>& x_raw) {
    if (x_raw.size() != model.n_features()) throw DimensionMismatch("feature dimension mismatch");
    const std::vector<double> x = model.has_scaler() ? model.scaler.transform(x_raw) : x_raw;
    std::vector<double> margins(model.n_labels());
    for (std::size_t l = 0; l < model.n_labels(); ++l) {
        double m = model.base_scores[l];
        for (const Tree& t : model.forests[l]) m += t.predict(x);
        margins[l] = m;
    }
    return margins;
}

inline std::vector<double> predict_proba(const BoostedModel& model, const std::vector<double>& x_raw) {
    std::vector<double> out = predict_margin(model, x_raw);
    for (double& m : out) m = std::clamp(sigmoid(m), 1e-15, 1.0 - 1e-15);
    return out;
}

inline std::size_t predict_class(const BoostedModel& model, const std::vector<double>& x_raw) {
    const std::vector<double> margins = predict_margin(model, x_raw);
    std::size_t best = 0;
    for (std::size_t l = 1; l < margins.size(); ++l)
        if (margins[l] > margins[best]) best = l;
    return best;
}

// ---- metrics ------------------------------------------------------------------

// Mann-Whitney ROC-AUC with ties credited half.
inline double roc_auc(const std::vector<double>& scores, const std::vector<double>& labels) {
    if (scores.size() != labels.size()) throw DimensionMismatch("score/label size mismatch");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (double l : labels)
        if (l == 1.0) ++n_pos;
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw SingleClass("ROC-AUC needs both classes");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return a < b;
    });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] == 1.0) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

// Macro ROC-AUC for multilabel tasks; accuracy, per-class F1 and confusion
// counts for multiclass. Single-class labels are excluded with a note.
inline Metrics evaluate(const BoostedModel& model, const Matrix& x_raw,
                        const tabular::LabelMatrix& y) {
    if (x_raw.rows != y.track_ids.size()) throw DimensionMismatch("feature/label row mismatch");
    const std::size_t n = x_raw.rows;
    const std::size_t n_labels = model.n_labels();
    if (y.tag_names.size() != n_labels) throw DimensionMismatch("label set mismatch");

    Matrix margins(n, n_labels);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(x_raw.row(i), x_raw.row(i) + x_raw.cols);
        const std::vector<double> m = predict_margin(model, row);
        for (std::size_t l = 0; l < n_labels; ++l) margins.at(i, l) = m[l];
    }

    Metrics metrics;
    metrics.per_label_auc.resize(n_labels);
    double auc_sum = 0.0;
    std::size_t auc_count = 0;
    for (std::size_t l = 0; l < n_labels; ++l) {
        std::vector<double> scores(n), labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = margins.at(i, l);
            labels[i] = y.indicators.at(i, l);
        }
        try {
            const double auc = roc_auc(scores, labels);
            metrics.per_label_auc[l] = auc;
            auc_sum += auc;
            ++auc_count;
        } catch (const SingleClass&) {
            metrics.excluded_labels.push_back(y.tag_names[l]);
        }
    }
    if (auc_count > 0) metrics.macro_auc = auc_sum / static_cast<double>(auc_count);

    if (model.task_kind == tabular::TaskKind::Multiclass) {
        metrics.confusion.assign(n_labels, std::vector<std::size_t>(n_labels, 0));
        std::size_t correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t truth = 0;
            for (std::size_t l = 0; l < n_labels; ++l)
                if (y.indicators.at(i, l) == 1.0) truth = l;
            std::size_t pred = 0;
            for (std::size_t l = 1; l < n_labels; ++l)
                if (margins.at(i, l) > margins.at(i, pred)) pred = l;
            metrics.confusion[truth][pred]++;
            if (truth == pred) ++correct;
        }
        metrics.accuracy = static_cast<double>(correct) / static_cast<double>(n);
        metrics.per_class_f1.resize(n_labels, 0.0);
        for (std::size_t c = 0; c < n_labels; ++c) {
            std::size_t tp = metrics.confusion[c][c];
            std::size_t fp = 0, fn = 0;
            for (std::size_t o = 0; o < n_labels; ++o) {
                if (o == c) continue;
                fp += metrics.confusion[o][c];
                fn += metrics.confusion[c][o];
            }
            const double denom = 2.0 * static_cast<double>(tp) + static_cast<double>(fp + fn);
            metrics.per_class_f1[c] = denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
        }
    }
    return metrics;
}

// ---- persistence ----------------------------------------------------------------

inline nlohmann::json to_json(const BoostedModel& model) {
    nlohmann::json j;
    j["format"] = "tagscope-gbdt";
    j["task_kind"] = model.task_kind == tabular::TaskKind::Multilabel ? "multilabel" : "multiclass";
    nlohmann::json params;
    params["n_trees"] = model.params.n_trees;
    params["max_depth"] = model.params.max_depth;
    params["learning_rate"] = model.params.learning_rate;
    params["lambda"] = model.params.lambda;
    params["gamma"] = model.params.gamma;
    params["min_child_weight"] = model.params.min_child_weight;
    params["subsample"] = model.params.subsample;
    params["colsample"] = model.params.colsample;
    params["seed"] = model.params.seed;
    j["params"] = params;
    j["learning_rate"] = model.params.learning_rate;
    j["feature_names"] = model.feature_names;
    j["label_names"] = model.label_names;
    j["base_scores"] = model.base_scores;

    nlohmann::json forests = nlohmann::json::array();
    for (const auto& forest : model.forests) {
        nlohmann::json trees = nlohmann::json::array();
        for (const Tree& t : forest) {
            nlohmann::json nodes = nlohmann::json::array();
            for (const TreeNode& nd : t.nodes) {
                nlohmann::json node;
                node["feature"] = nd.feature;
                node["threshold"] = nd.threshold;
                node["left"] = nd.left;
                node["right"] = nd.right;
                node["leaf_value"] = nd.leaf_value;
                node["cover"] = nd.cover;
                node["gain"] = nd.gain;
                nodes.push_back(std::move(node));
            }
            trees.push_back(std::move(nodes));
        }
        forests.push_back(std::move(trees));
    }
    j["trees"] = forests;

    if (!model.scaler.mean.empty())
        j["scaler"] = {{"mean", model.scaler.mean}, {"std", model.scaler.std_dev}};
    j["split"] = {{"train", model.split.train},
                  {"validation", model.split.validation},
                  {"test", model.split.test},
                  {"seed", model.split.seed}};
    return j;
}

inline BoostedModel from_json(const nlohmann::json& j) {
    BoostedModel m;
    m.task_kind = j.at("task_kind").get<std::string>() == "multiclass"
                      ? tabular::TaskKind::Multiclass
                      : tabular::TaskKind::Multilabel;
    const auto& p = j.at("params");
    m.params.n_trees = p.at("n_trees").get<int>();
    m.params.max_depth = p.at("max_depth").get<int>();
    m.params.learning_rate = p.at("learning_rate").get<double>();
    m.params.lambda = p.at("lambda").get<double>();
    m.params.gamma = p.at("gamma").get<double>();
    m.params.min_child_weight = p.at("min_child_weight").get<double>();
    m.params.subsample = p.at("subsample").get<double>();
    m.params.colsample = p.at("colsample").get<double>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.label_names = j.at("label_names").get<std::vector<std::string>>();
    m.base_scores = j.at("base_scores").get<std::vector<double>>();

    m.has_cover = true;
    for (const auto& trees : j.at("trees")) {
        std::vector<Tree> forest;
        for (const auto& nodes : trees) {
            Tree t;
            for (const auto& node : nodes) {
                TreeNode nd;
                nd.feature = node.at("feature").get<int>();
                nd.threshold = node.at("threshold").get<double>();
                nd.left = node.at("left").get<int>();
                nd.right = node.at("right").get<int>();
                nd.leaf_value = node.at("leaf_value").get<double>();
                if (node.contains("cover"))
                    nd.cover = node.at("cover").get<double>();
                else
                    m.has_cover = false;
                nd.gain = node.value("gain", 0.0);
                t.nodes.push_back(nd);
            }
            forest.push_back(std::move(t));
        }
        m.forests.push_back(std::move(forest));
    }

    if (j.contains("scaler")) {
        m.scaler.mean = j["scaler"].at("mean").get<std::vector<double>>();
        m.scaler.std_dev = j["scaler"].at("std").get<std::vector<double>>();
    }
    if (j.contains("split")) {
        m.split.train = j["split"].at("train").get<std::vector<std::string>>();
        m.split.validation = j["split"].at("validation").get<std::vector<std::string>>();
        m.split.test = j["split"].at("test").get<std::vector<std::string>>();
        m.split.seed = j["split"].at("seed").get<std::uint64_t>();
    }
    return m;
}

inline void save(const BoostedModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write model: " + path);
    out << to_json(m).dump(2) << "\n";
}

inline BoostedModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model: " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

}  // namespace tagscope::gbdt
