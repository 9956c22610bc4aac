#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tagscope/gbdt.hpp"
#include "tagscope/pipeline.hpp"
#include "tagscope/rng.hpp"
#include "tagscope/tabular.hpp"

namespace tagscope::explain {

struct ImportanceReport {
    std::string method;  // "weight", "gain" or "permutation"
    std::string scope;   // "global" or a label name
    std::vector<double> scores;
    std::vector<double> dispersion;  // permutation only: std over repeats
};

struct ShapExplanation {
    std::vector<double> phi;
    double base_value = 0.0;
    std::string label;
    double margin = 0.0;
};

struct AblationRow {
    std::string name;
    std::vector<std::string> groups;
    std::string metric_name;
    std::optional<double> metric;
    std::size_t n_features = 0;
    std::string params_hash;
    std::string error;
};

struct AblationReport {
    std::vector<AblationRow> rows;
};

// ---- split-frequency and gain importance -------------------------------------

// weight = number of internal nodes splitting on each feature; gain = summed
// split gain. scope -1 aggregates over all labels.
inline ImportanceReport weight_importance(const gbdt::BoostedModel& model, int label = -1,
                                          bool use_gain = false) {
    ImportanceReport report;
    report.method = use_gain ? "gain" : "weight";
    report.scope = label < 0 ? "global" : model.label_names[static_cast<std::size_t>(label)];
    report.scores.assign(model.n_features(), 0.0);
    for (std::size_t l = 0; l < model.forests.size(); ++l) {
        if (label >= 0 && l != static_cast<std::size_t>(label)) continue;
        for (const gbdt::Tree& t : model.forests[l])
            for (const gbdt::TreeNode& nd : t.nodes)
                if (!nd.is_leaf())
                    report.scores[static_cast<std::size_t>(nd.feature)] += use_gain ? nd.gain : 1.0;
    }
    return report;
}

// ---- permutation importance ----------------------------------------------------

enum class Metric { MacroAuc, Accuracy };

inline double scalar_metric(const gbdt::Metrics& m, Metric metric) {
    if (metric == Metric::MacroAuc) {
        if (!m.macro_auc) throw SingleClass("macro AUC undefined: every label single-class");
        return *m.macro_auc;
    }
    if (!m.accuracy) throw Error("accuracy undefined for this task");
    return *m.accuracy;
}

// Mean and std, over seeded repeats, of the metric drop caused by shuffling
// one raw feature column. Shuffle seeds derive as seed + feature*1000003 +
// repeat, so any evaluation order reproduces the same report.
inline ImportanceReport permutation_importance(const gbdt::BoostedModel& model, const Matrix& x_raw,
                                               const tabular::LabelMatrix& y, Metric metric,
                                               std::size_t repeats, std::uint64_t seed) {
    if (repeats < 1) throw Error("repeats must be >= 1");
    const double baseline = scalar_metric(gbdt::evaluate(model, x_raw, y), metric);
    const std::size_t n = x_raw.rows;
    const std::size_t d = x_raw.cols;

    ImportanceReport report;
    report.method = "permutation";
    report.scope = "global";
    report.scores.assign(d, 0.0);
    report.dispersion.assign(d, 0.0);

    Matrix shuffled = x_raw;
    for (std::size_t f = 0; f < d; ++f) {
        std::vector<double> drops(repeats);
        for (std::size_t r = 0; r < repeats; ++r) {
            std::vector<double> column(n);
            for (std::size_t i = 0; i < n; ++i) column[i] = x_raw.at(i, f);
            Rng rng(seed + f * 1000003ull + r);
            rng.shuffle(column);
            for (std::size_t i = 0; i < n; ++i) shuffled.at(i, f) = column[i];
            drops[r] = baseline - scalar_metric(gbdt::evaluate(model, shuffled, y), metric);
        }
        for (std::size_t i = 0; i < n; ++i) shuffled.at(i, f) = x_raw.at(i, f);
        double mean = 0.0;
        for (double v : drops) mean += v;
        mean /= static_cast<double>(repeats);
        double var = 0.0;
        for (double v : drops) var += (v - mean) * (v - mean);
        report.scores[f] = mean;
        report.dispersion[f] = std::sqrt(var / static_cast<double>(repeats));
    }
    return report;
}

// ---- exact tree SHAP -------------------------------------------------------------

namespace detail {

struct PathElement {
    int feature;
    double zero_fraction;  // cover fraction flowing through when the feature is out
    double one_fraction;   // 1 when the instance path goes this way, else 0
    double pweight;
};

inline void extend_path(std::vector<PathElement>& path, double pz, double po, int pi) {
    const int depth = static_cast<int>(path.size());
    path.push_back({pi, pz, po, depth == 0 ? 1.0 : 0.0});
    for (int i = depth - 1; i >= 0; --i) {
        path[static_cast<std::size_t>(i + 1)].pweight +=
            po * path[static_cast<std::size_t>(i)].pweight * (i + 1) / static_cast<double>(depth + 1);
        path[static_cast<std::size_t>(i)].pweight =
            pz * path[static_cast<std::size_t>(i)].pweight * (depth - i) / static_cast<double>(depth + 1);
    }
}

inline void unwind_path(std::vector<PathElement>& path, std::size_t i) {
    const int depth = static_cast<int>(path.size()) - 1;
    double next = path[static_cast<std::size_t>(depth)].pweight;
    if (path[i].one_fraction != 0.0) {
        for (int j = depth - 1; j >= 0; --j) {
            const double tmp = path[static_cast<std::size_t>(j)].pweight;
            path[static_cast<std::size_t>(j)].pweight = next * (depth + 1) / static_cast<double>(j + 1);
            next = tmp - path[static_cast<std::size_t>(j)].pweight * path[i].zero_fraction *
                             (depth - j) / static_cast<double>(depth + 1);
        }
    } else {
        for (int j = depth - 1; j >= 0; --j)
            path[static_cast<std::size_t>(j)].pweight = path[static_cast<std::size_t>(j)].pweight *
                                                        (depth + 1) /
                                                        (path[i].zero_fraction * (depth - j));
    }
    for (std::size_t j = i; j < static_cast<std::size_t>(depth); ++j) {
        path[j].feature = path[j + 1].feature;
        path[j].zero_fraction = path[j + 1].zero_fraction;
        path[j].one_fraction = path[j + 1].one_fraction;
    }
    path.pop_back();
}

inline double unwound_sum(const std::vector<PathElement>& path, std::size_t i) {
    const int depth = static_cast<int>(path.size()) - 1;
    double total = 0.0;
    if (path[i].one_fraction != 0.0) {
        double next = path[static_cast<std::size_t>(depth)].pweight;
        for (int j = depth - 1; j >= 0; --j) {
            const double tmp = next / ((j + 1) * path[i].one_fraction);
            total += tmp;
            next = path[static_cast<std::size_t>(j)].pweight - tmp * path[i].zero_fraction * (depth - j);
        }
    } else {
        for (int j = depth - 1; j >= 0; --j)
            total += path[static_cast<std::size_t>(j)].pweight / ((depth - j) * path[i].zero_fraction);
    }
    return total * (depth + 1);
}

inline void tree_shap_recurse(const gbdt::Tree& tree, const double* x, std::vector<double>& phi,
                              std::vector<PathElement> path, int node, double pz, double po,
                              int pi) {
    extend_path(path, pz, po, pi);
    const gbdt::TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
    if (nd.is_leaf()) {
        for (std::size_t i = 1; i < path.size(); ++i)
            phi[static_cast<std::size_t>(path[i].feature)] +=
                unwound_sum(path, i) * (path[i].one_fraction - path[i].zero_fraction) * nd.leaf_value;
        return;
    }
    const int hot = x[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
    const int cold = hot == nd.left ? nd.right : nd.left;
    double iz = 1.0, io = 1.0;
    std::size_t k = 1;
    for (; k < path.size(); ++k)
        if (path[k].feature == nd.feature) break;
    if (k < path.size()) {
        iz = path[k].zero_fraction;
        io = path[k].one_fraction;
        unwind_path(path, k);
    }
    const double hot_cover = tree.nodes[static_cast<std::size_t>(hot)].cover;
    const double cold_cover = tree.nodes[static_cast<std::size_t>(cold)].cover;
    if (hot_cover > 0.0)
        tree_shap_recurse(tree, x, phi, path, hot, iz * hot_cover / nd.cover, io, nd.feature);
    if (cold_cover > 0.0)
        tree_shap_recurse(tree, x, phi, path, cold, iz * cold_cover / nd.cover, 0.0, nd.feature);
}

inline double expected_value(const gbdt::Tree& tree, int node = 0) {
    const gbdt::TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
    if (nd.is_leaf()) return nd.leaf_value;
    const double cl = tree.nodes[static_cast<std::size_t>(nd.left)].cover;
    const double cr = tree.nodes[static_cast<std::size_t>(nd.right)].cover;
    if (cl + cr <= 0.0) return 0.0;
    return (cl * expected_value(tree, nd.left) + cr * expected_value(tree, nd.right)) / (cl + cr);
}

}  // namespace detail

// Exact per-prediction Shapley attributions of the margin for one label,
// using the cover-weighted path-conditional expectation. base_value + sum(phi)
// reconstructs the margin.
inline ShapExplanation shap_values(const gbdt::BoostedModel& model, const std::vector<double>& x_raw,
                                   std::size_t label) {
    if (!model.has_cover) throw MissingCover("model file lacks per-node cover; cannot compute SHAP");
    if (label >= model.n_labels()) throw DimensionMismatch("label index out of range");
    if (x_raw.size() != model.n_features()) throw DimensionMismatch("feature dimension mismatch");

    const std::vector<double> x = model.has_scaler() ? model.scaler.transform(x_raw) : x_raw;
    ShapExplanation ex;
    ex.label = model.label_names[label];
    ex.phi.assign(model.n_features(), 0.0);
    ex.base_value = model.base_scores[label];
    double margin = model.base_scores[label];
    for (const gbdt::Tree& tree : model.forests[label]) {
        if (tree.nodes.empty()) continue;
        detail::tree_shap_recurse(tree, x.data(), ex.phi, {}, 0, 1.0, 1.0, -1);
        ex.base_value += detail::expected_value(tree);
        margin += tree.predict(x);
    }
    ex.margin = margin;
    return ex;
}

// Mean |phi| per feature over a seeded sample of at most `sample_cap`
// instances; labels averaged when `label` is -1.
inline ImportanceReport shap_summary(const gbdt::BoostedModel& model, const Matrix& x_raw, int label,
                                     std::size_t sample_cap, std::uint64_t seed) {
    ImportanceReport report;
    report.method = "shap";
    report.scope = label < 0 ? "global" : model.label_names[static_cast<std::size_t>(label)];
    report.scores.assign(model.n_features(), 0.0);

    std::vector<std::size_t> idx(x_raw.rows);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (idx.size() > sample_cap) {
        Rng rng(seed);
        rng.shuffle(idx);
        idx.resize(sample_cap);
        std::sort(idx.begin(), idx.end());
    }

    std::size_t count = 0;
    for (std::size_t i : idx) {
        std::vector<double> row(x_raw.row(i), x_raw.row(i) + x_raw.cols);
        for (std::size_t l = 0; l < model.n_labels(); ++l) {
            if (label >= 0 && l != static_cast<std::size_t>(label)) continue;
            const ShapExplanation ex = shap_values(model, row, l);
            for (std::size_t f = 0; f < ex.phi.size(); ++f) report.scores[f] += std::abs(ex.phi[f]);
            ++count;
        }
    }
    if (count > 0)
        for (double& s : report.scores) s /= static_cast<double>(count);
    return report;
}

// ---- group ablation -------------------------------------------------------------

// Retrain on every non-empty subset of the feature groups and evaluate on the
// test split. Scalers are refit per subset; a failing row reports its error
// without aborting the rest.
inline AblationReport ablation(const std::vector<tabular::FeatureVector>& rows,
                               const tabular::LabelMatrix& labels, const tabular::SplitSpec& split,
                               const gbdt::TrainParams& params,
                               const std::vector<std::string>& feature_names,
                               const std::vector<std::string>& group_of, int jobs = 1) {
    if (feature_names.size() != group_of.size()) throw DimensionMismatch("group tag count mismatch");

    static const std::vector<std::vector<std::string>> kSubsets = {
        {"harmonic"},           {"midlevel"},           {"signal"},
        {"harmonic", "midlevel"}, {"harmonic", "signal"}, {"midlevel", "signal"},
        {"harmonic", "midlevel", "signal"}};

    AblationReport report;
    for (const auto& groups : kSubsets) {
        AblationRow row;
        row.groups = groups;
        row.name = groups.size() == 3 ? "all" : [&] {
            std::string n;
            for (const auto& g : groups) {
                if (!n.empty()) n += "+";
                n += g;
            }
            return n;
        }();

        std::vector<std::size_t> columns;
        std::vector<std::string> names;
        for (std::size_t f = 0; f < group_of.size(); ++f)
            for (const auto& g : groups)
                if (group_of[f] == g) {
                    columns.push_back(f);
                    names.push_back(feature_names[f]);
                    break;
                }
        row.n_features = columns.size();
        row.metric_name =
            labels.task_kind == tabular::TaskKind::Multilabel ? "macro_auc" : "accuracy";
        {
            std::string blob = row.name;
            blob += "|" + std::to_string(params.n_trees) + "|" + std::to_string(params.max_depth) +
                    "|" + format_double(params.learning_rate) + "|" + format_double(params.lambda) +
                    "|" + format_double(params.gamma) + "|" + format_double(params.min_child_weight) +
                    "|" + format_double(params.subsample) + "|" + format_double(params.colsample) +
                    "|" + std::to_string(params.seed);
            row.params_hash = hex64(fnv1a64(blob));
        }

        try {
            const gbdt::BoostedModel model =
                pipeline::train_on_split(rows, labels, split, params, columns, names, jobs);
            const gbdt::Metrics metrics =
                pipeline::evaluate_on(model, rows, labels, split.test, columns);
            row.metric = labels.task_kind == tabular::TaskKind::Multilabel
                             ? metrics.macro_auc
                             : metrics.accuracy;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace tagscope::explain
