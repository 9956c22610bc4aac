#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "tagscope/gbdt.hpp"
#include "tagscope/rng.hpp"
#include "test_util.hpp"

using namespace tagscope;

namespace {

tabular::LabelMatrix binary_labels(const std::vector<double>& y, const std::string& tag = "pos") {
    tabular::LabelMatrix labels;
    labels.task_kind = tabular::TaskKind::Multilabel;
    labels.tag_names = {tag};
    labels.indicators = Matrix(y.size(), 1);
    for (std::size_t i = 0; i < y.size(); ++i) {
        labels.track_ids.push_back("t" + std::to_string(i));
        labels.indicators.at(i, 0) = y[i];
    }
    return labels;
}

// two interleaved gaussian blobs in 2-D, seed-fixed
void gaussians(Rng& rng, std::size_t n, Matrix& x, std::vector<double>& y) {
    x = Matrix(n, 2);
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool pos = i % 2 == 1;
        const double cx = pos ? 0.9 : -0.9;
        const double cy = pos ? -0.4 : 0.4;
        x.at(i, 0) = cx + rng.next_gauss();
        x.at(i, 1) = cy + rng.next_gauss();
        y[i] = pos ? 1.0 : 0.0;
    }
}

}  // namespace

TEST_CASE("split_gain: formula arithmetic") {
    REQUIRE(gbdt::split_gain(-2, 2, 2, 2, 1, 0) == Catch::Approx(4.0 / 3.0).margin(1e-12));
    REQUIRE(gbdt::split_gain(0, 1, 0, 1, 1, 0.7) == Catch::Approx(-0.7));
    // symmetric swap leaves the gain unchanged
    REQUIRE(gbdt::split_gain(-1.5, 0.8, 2.5, 1.1, 0.5, 0.1) ==
            gbdt::split_gain(2.5, 1.1, -1.5, 0.8, 0.5, 0.1));
}

TEST_CASE("train: one stump separates 1-D data perfectly") {
    Matrix x(10, 1);
    std::vector<double> y(10);
    for (int i = 0; i < 10; ++i) {
        x.at(static_cast<std::size_t>(i), 0) = i < 5 ? -1.0 - i * 0.1 : 1.0 + i * 0.1;
        y[static_cast<std::size_t>(i)] = i < 5 ? 0.0 : 1.0;
    }
    gbdt::TrainParams p;
    p.n_trees = 1;
    p.max_depth = 1;
    p.subsample = 1.0;
    p.colsample = 1.0;
    auto [model, report] = gbdt::train(x, binary_labels(y), p, {"f0"});
    for (int i = 0; i < 10; ++i) {
        const double m = gbdt::predict_margin(model, {x.at(static_cast<std::size_t>(i), 0)})[0];
        REQUIRE((m > 0.0) == (y[static_cast<std::size_t>(i)] == 1.0));
    }
    REQUIRE(model.forests[0].size() == 1);
    REQUIRE(model.forests[0][0].nodes.size() == 3);
}

TEST_CASE("train: zero trees predict the empirical positive rate") {
    Matrix x(8, 1);
    std::vector<double> y = {1, 0, 0, 0, 1, 0, 0, 0};  // rate 0.25
    for (int i = 0; i < 8; ++i) x.at(static_cast<std::size_t>(i), 0) = i;
    gbdt::TrainParams p;
    p.n_trees = 0;
    auto [model, report] = gbdt::train(x, binary_labels(y), p, {"f0"});
    const double proba = gbdt::predict_proba(model, {3.0})[0];
    REQUIRE(proba == Catch::Approx(0.25).margin(1e-12));
    REQUIRE(gbdt::predict_margin(model, {3.0})[0] == model.base_scores[0]);
}

TEST_CASE("train: matches an independent reference booster on interleaved gaussians") {
    Rng rng(404);
    Matrix x;
    std::vector<double> y;
    gaussians(rng, 400, x, y);
    Matrix xt;
    std::vector<double> yt;
    gaussians(rng, 100, xt, yt);

    gbdt::TrainParams p;
    p.n_trees = 30;
    p.max_depth = 3;
    p.learning_rate = 0.3;
    p.subsample = 1.0;
    p.colsample = 1.0;
    p.gamma = 0.0;
    p.min_child_weight = 1.0;
    p.lambda = 1.0;
    auto [model, report] = gbdt::train(x, binary_labels(y), p, {"f0", "f1"});

    std::vector<std::vector<double>> ref_rows(400, std::vector<double>(2));
    for (std::size_t i = 0; i < 400; ++i) {
        ref_rows[i][0] = x.at(i, 0);
        ref_rows[i][1] = x.at(i, 1);
    }
    const auto ref = oracles::ref_train(ref_rows, y, p.n_trees, p.max_depth, p.learning_rate,
                                        p.lambda, p.min_child_weight);

    std::vector<double> lib_scores(100), ref_scores(100);
    for (std::size_t i = 0; i < 100; ++i) {
        lib_scores[i] = gbdt::predict_margin(model, {xt.at(i, 0), xt.at(i, 1)})[0];
        ref_scores[i] = ref.margin({xt.at(i, 0), xt.at(i, 1)});
    }
    const double lib_auc = gbdt::roc_auc(lib_scores, yt);
    const double ref_auc = gbdt::roc_auc(ref_scores, yt);
    REQUIRE(std::abs(lib_auc - ref_auc) <= 0.02);
    REQUIRE(lib_auc > 0.8);
}

TEST_CASE("predict: single stump traces base + leaf on a two-point dataset") {
    Matrix x(2, 1);
    x.at(0, 0) = 0.0;
    x.at(1, 0) = 1.0;
    gbdt::TrainParams p;
    p.n_trees = 1;
    p.max_depth = 1;
    p.subsample = 1.0;
    p.colsample = 1.0;
    p.learning_rate = 0.3;
    p.lambda = 1.0;
    p.min_child_weight = 0.0;
    auto [model, report] = gbdt::train(x, binary_labels({0, 1}), p, {"f0"});
    // base = log(1/1) = 0; p = 0.5; g = +-0.5, h = 0.25
    const double expected_left = -0.3 * 0.5 / (0.25 + 1.0);
    const auto& tree = model.forests[0][0];
    REQUIRE(tree.nodes[static_cast<std::size_t>(tree.nodes[0].left)].leaf_value ==
            Catch::Approx(expected_left).margin(1e-12));
    REQUIRE(gbdt::predict_margin(model, {0.0})[0] ==
            Catch::Approx(model.base_scores[0] + expected_left).margin(1e-12));
}

TEST_CASE("predict: fixture forest matches an independent tree walk") {
    Rng rng(12);
    gbdt::BoostedModel model;
    model.task_kind = tabular::TaskKind::Multilabel;
    model.feature_names = {"a", "b", "c", "d"};
    model.label_names = {"tag"};
    model.base_scores = {0.2};
    model.forests.resize(1);
    for (int t = 0; t < 3; ++t) model.forests[0].push_back(oracles::random_tree(rng, 3, 4));

    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> x(4);
        for (double& v : x) v = rng.next_range(-1.5, 1.5);
        double expected = 0.2;
        for (const auto& tree : model.forests[0]) {
            int n = 0;
            while (!tree.nodes[static_cast<std::size_t>(n)].is_leaf()) {
                const auto& nd = tree.nodes[static_cast<std::size_t>(n)];
                n = x[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
            }
            expected += tree.nodes[static_cast<std::size_t>(n)].leaf_value;
        }
        REQUIRE(gbdt::predict_margin(model, x)[0] == Catch::Approx(expected).margin(1e-12));
    }
}

TEST_CASE("predict: dimension mismatch is rejected") {
    Matrix x(4, 2);
    std::vector<double> y = {0, 1, 0, 1};
    gbdt::TrainParams p;
    p.n_trees = 1;
    auto [model, report] = gbdt::train(x, binary_labels(y), p, {"f0", "f1"});
    REQUIRE_THROWS_AS(gbdt::predict_margin(model, {1.0}), DimensionMismatch);
}

TEST_CASE("roc_auc: ordering, ties, the worked 0.75 example, and SingleClass") {
    REQUIRE(gbdt::roc_auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
    REQUIRE(gbdt::roc_auc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == 0.5);
    REQUIRE(gbdt::roc_auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == 0.75);
    REQUIRE_THROWS_AS(gbdt::roc_auc({0.1, 0.2}, {1, 1}), SingleClass);
}

TEST_CASE("evaluate: hand-built confusion {A->A:2, A->B:1, B->B:3}") {
    gbdt::BoostedModel model;
    model.task_kind = tabular::TaskKind::Multiclass;
    model.feature_names = {"x"};
    model.label_names = {"A", "B"};
    model.base_scores = {0.0, 0.0};
    model.forests.resize(2);
    auto stump = [](double left, double right) {
        gbdt::Tree t;
        t.nodes.resize(3);
        t.nodes[0].feature = 0;
        t.nodes[0].threshold = 0.5;
        t.nodes[0].left = 1;
        t.nodes[0].right = 2;
        t.nodes[0].cover = 2.0;
        t.nodes[1].leaf_value = left;
        t.nodes[1].cover = 1.0;
        t.nodes[2].leaf_value = right;
        t.nodes[2].cover = 1.0;
        return t;
    };
    model.forests[0].push_back(stump(1.0, -1.0));  // predicts A below 0.5
    model.forests[1].push_back(stump(-1.0, 1.0));  // predicts B above 0.5

    Matrix x(6, 1);
    tabular::LabelMatrix y;
    y.task_kind = tabular::TaskKind::Multiclass;
    y.tag_names = {"A", "B"};
    y.indicators = Matrix(6, 2);
    const double xs[6] = {0.0, 0.0, 1.0, 1.0, 1.0, 1.0};  // first three are truth A
    for (int i = 0; i < 6; ++i) {
        x.at(static_cast<std::size_t>(i), 0) = xs[i];
        y.track_ids.push_back("t" + std::to_string(i));
        y.indicators.at(static_cast<std::size_t>(i), i < 3 ? 0 : 1) = 1.0;
    }
    const auto m = gbdt::evaluate(model, x, y);
    REQUIRE(m.accuracy == Catch::Approx(5.0 / 6.0));
    REQUIRE(m.confusion[0][0] == 2);
    REQUIRE(m.confusion[0][1] == 1);
    REQUIRE(m.confusion[1][1] == 3);
    REQUIRE(m.per_class_f1[0] == 0.8);
}

TEST_CASE("evaluate: macro AUC averages per-label AUCs (1.0 and 0.5 -> 0.75)") {
    gbdt::BoostedModel model;
    model.task_kind = tabular::TaskKind::Multilabel;
    model.feature_names = {"x"};
    model.label_names = {"sep", "flat"};
    model.base_scores = {0.0, 0.0};
    model.forests.resize(2);
    {
        gbdt::Tree t;
        t.nodes.resize(3);
        t.nodes[0] = {0, 0.5, 1, 2, 0.0, 4.0, 1.0};
        t.nodes[1] = {-1, 0, -1, -1, -1.0, 2.0, 0.0};
        t.nodes[2] = {-1, 0, -1, -1, 1.0, 2.0, 0.0};
        model.forests[0].push_back(t);  // separates perfectly
        // second label: empty forest, margins all equal
    }
    Matrix x(4, 1);
    tabular::LabelMatrix y;
    y.task_kind = tabular::TaskKind::Multilabel;
    y.tag_names = {"sep", "flat"};
    y.indicators = Matrix(4, 2);
    for (int i = 0; i < 4; ++i) {
        x.at(static_cast<std::size_t>(i), 0) = i < 2 ? 0.0 : 1.0;
        y.track_ids.push_back("t" + std::to_string(i));
        y.indicators.at(static_cast<std::size_t>(i), 0) = i < 2 ? 0.0 : 1.0;
        y.indicators.at(static_cast<std::size_t>(i), 1) = i % 2 ? 1.0 : 0.0;
    }
    const auto m = gbdt::evaluate(model, x, y);
    REQUIRE(*m.per_label_auc[0] == 1.0);
    REQUIRE(*m.per_label_auc[1] == 0.5);
    REQUIRE(*m.macro_auc == 0.75);
}

TEST_CASE("train: deterministic bytes across reruns and jobs counts") {
    Rng rng(31);
    Matrix x(120, 5);
    for (double& v : x.data) v = rng.next_gauss();
    tabular::LabelMatrix y;
    y.task_kind = tabular::TaskKind::Multilabel;
    y.tag_names = {"a", "b", "c"};
    y.indicators = Matrix(120, 3);
    for (std::size_t i = 0; i < 120; ++i) {
        y.track_ids.push_back("t" + std::to_string(i));
        for (std::size_t t = 0; t < 3; ++t)
            y.indicators.at(i, t) = x.at(i, t) + 0.3 * rng.next_gauss() > 0.0 ? 1.0 : 0.0;
    }
    gbdt::TrainParams p;
    p.n_trees = 20;
    p.max_depth = 4;
    auto [m1, r1] = gbdt::train(x, y, p, {"f0", "f1", "f2", "f3", "f4"}, 1);
    auto [m2, r2] = gbdt::train(x, y, p, {"f0", "f1", "f2", "f3", "f4"}, 1);
    auto [m4, r4] = gbdt::train(x, y, p, {"f0", "f1", "f2", "f3", "f4"}, 4);
    REQUIRE(gbdt::to_json(m1).dump() == gbdt::to_json(m2).dump());
    REQUIRE(gbdt::to_json(m1).dump() == gbdt::to_json(m4).dump());
}

TEST_CASE("train: logistic loss is non-increasing per round with subsample 1") {
    Rng rng(32);
    Matrix x(150, 4);
    for (double& v : x.data) v = rng.next_gauss();
    std::vector<double> y(150);
    for (std::size_t i = 0; i < 150; ++i)
        y[i] = x.at(i, 0) - 0.5 * x.at(i, 2) + 0.4 * rng.next_gauss() > 0.0 ? 1.0 : 0.0;
    gbdt::TrainParams p;
    p.n_trees = 60;
    p.subsample = 1.0;
    p.colsample = 1.0;
    auto [model, report] = gbdt::train(x, binary_labels(y), p, {"f0", "f1", "f2", "f3"});
    const auto& losses = report.round_losses[0];
    REQUIRE(losses.size() == 60);
    for (std::size_t i = 1; i < losses.size(); ++i) REQUIRE(losses[i] <= losses[i - 1] + 1e-12);
}

TEST_CASE("train: cover bookkeeping is exact and positive") {
    Rng rng(33);
    Matrix x(200, 3);
    for (double& v : x.data) v = rng.next_gauss();
    std::vector<double> y(200);
    for (std::size_t i = 0; i < 200; ++i) y[i] = x.at(i, 1) > 0.0 ? 1.0 : 0.0;
    gbdt::TrainParams p;
    p.n_trees = 10;
    p.max_depth = 4;
    auto [model, report] = gbdt::train(x, binary_labels(y), p, {"f0", "f1", "f2"});
    for (const auto& tree : model.forests[0]) {
        for (const auto& nd : tree.nodes) {
            REQUIRE(nd.cover > 0.0);
            if (!nd.is_leaf())
                REQUIRE(nd.cover == tree.nodes[static_cast<std::size_t>(nd.left)].cover +
                                        tree.nodes[static_cast<std::size_t>(nd.right)].cover);
        }
    }
}

TEST_CASE("train: a pure-noise extra column barely moves test AUC") {
    Rng rng(34);
    auto make = [&](std::size_t n, bool extra, Rng& r) {
        Matrix x(n, extra ? 4u : 3u);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = r.next_gauss(), b = r.next_gauss(), c = r.next_gauss();
            x.at(i, 0) = a;
            x.at(i, 1) = b;
            x.at(i, 2) = c;
            if (extra) x.at(i, 3) = r.next_gauss();
            y[i] = a + 0.7 * b + 0.5 * r.next_gauss() > 0.0 ? 1.0 : 0.0;
        }
        return std::make_pair(x, y);
    };
    Rng ra(100), rb(100);
    auto [x3, y3] = make(500, false, ra);
    auto [x4, y4] = make(500, true, rb);
    Rng ta(200), tb(200);
    auto [xt3, yt3] = make(200, false, ta);
    auto [xt4, yt4] = make(200, true, tb);

    gbdt::TrainParams p;
    p.n_trees = 40;
    p.max_depth = 3;
    auto [m3, r3] = gbdt::train(x3, binary_labels(y3), p, {"f0", "f1", "f2"});
    auto [m4, r4] = gbdt::train(x4, binary_labels(y4), p, {"f0", "f1", "f2", "noise"});

    auto auc_of = [&](const gbdt::BoostedModel& m, const Matrix& x, const std::vector<double>& y) {
        std::vector<double> scores(x.rows);
        for (std::size_t i = 0; i < x.rows; ++i) {
            std::vector<double> row(x.row(i), x.row(i) + x.cols);
            scores[i] = gbdt::predict_margin(m, row)[0];
        }
        return gbdt::roc_auc(scores, y);
    };
    REQUIRE(std::abs(auc_of(m3, xt3, yt3) - auc_of(m4, xt4, yt4)) < 0.03);
}

TEST_CASE("predict_proba: strictly inside (0,1) even for extreme margins") {
    gbdt::BoostedModel model;
    model.task_kind = tabular::TaskKind::Multilabel;
    model.feature_names = {"x"};
    model.label_names = {"t"};
    model.base_scores = {500.0};  // absurd prior
    model.forests.resize(1);
    const double p = gbdt::predict_proba(model, {0.0})[0];
    REQUIRE(p > 0.0);
    REQUIRE(p < 1.0);
    model.base_scores = {-500.0};
    const double q = gbdt::predict_proba(model, {0.0})[0];
    REQUIRE(q > 0.0);
    REQUIRE(q < 1.0);
}

TEST_CASE("train: single-class label degenerates to base score with a warning") {
    Matrix x(6, 1);
    for (int i = 0; i < 6; ++i) x.at(static_cast<std::size_t>(i), 0) = i;
    gbdt::TrainParams p;
    p.n_trees = 5;
    auto [model, report] = gbdt::train(x, binary_labels({0, 0, 0, 0, 0, 0}, "never"), p, {"f0"});
    REQUIRE(model.forests[0].empty());
    REQUIRE(model.base_scores[0] == -10.0);
    REQUIRE(report.warnings.size() == 1);
}

TEST_CASE("model json: round-trip and the missing-cover flag") {
    test_util::TempDir dir("gbdt");
    Rng rng(35);
    Matrix x(50, 2);
    for (double& v : x.data) v = rng.next_gauss();
    std::vector<double> y(50);
    for (std::size_t i = 0; i < 50; ++i) y[i] = x.at(i, 0) > 0 ? 1.0 : 0.0;
    gbdt::TrainParams p;
    p.n_trees = 3;
    auto [model, report] = gbdt::train(x, binary_labels(y), p, {"f0", "f1"});
    gbdt::save(model, dir.str("m.json"));
    const auto loaded = gbdt::load(dir.str("m.json"));
    REQUIRE(gbdt::to_json(model).dump() == gbdt::to_json(loaded).dump());
    REQUIRE(loaded.has_cover);

    // strip the cover fields
    nlohmann::json j = gbdt::to_json(model);
    for (auto& forest : j["trees"])
        for (auto& tree : forest)
            for (auto& node : tree) node.erase("cover");
    const auto stripped = gbdt::from_json(j);
    REQUIRE_FALSE(stripped.has_cover);
}
