#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tagscope/midlevel.hpp"
#include "tagscope/rng.hpp"
#include "test_util.hpp"

using namespace tagscope;
using midlevel::kPooledDim;
using midlevel::kTargets;

namespace {

signal::MfccMatrix mfcc_of_rows(const std::vector<std::vector<double>>& rows) {
    signal::MfccMatrix m;
    m.coefficients = Matrix(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[0].size(); ++c) m.coefficients.at(r, c) = rows[r][c];
    return m;
}

std::array<double, kPooledDim> random_pooled(Rng& rng) {
    std::array<double, kPooledDim> p{};
    for (double& v : p) v = rng.next_gauss();
    return p;
}

double mse(const midlevel::MidLevelModel& model, const std::vector<midlevel::TrainingRow>& rows) {
    double acc = 0.0;
    for (const auto& r : rows) {
        const auto pred = midlevel::predict_raw(model, r.pooled);
        for (int t = 0; t < kTargets; ++t) {
            const double d = pred[static_cast<std::size_t>(t)] - r.targets[static_cast<std::size_t>(t)];
            acc += d * d;
        }
    }
    return acc / static_cast<double>(rows.size() * kTargets);
}

}  // namespace

TEST_CASE("pool_mfcc: identical rows have zero std half") {
    std::vector<double> row(40);
    for (std::size_t i = 0; i < 40; ++i) row[i] = static_cast<double>(i) * 0.1;
    const auto pooled = midlevel::pool_mfcc(mfcc_of_rows({row, row, row}));
    for (std::size_t i = 0; i < 40; ++i) {
        REQUIRE(pooled[i] == Catch::Approx(row[i]));
        REQUIRE(pooled[40 + i] == 0.0);
    }
}

TEST_CASE("pool_mfcc: single frame gives mean = row, std = 0") {
    std::vector<double> row(40, 1.5);
    const auto pooled = midlevel::pool_mfcc(mfcc_of_rows({row}));
    for (std::size_t i = 0; i < 40; ++i) {
        REQUIRE(pooled[i] == 1.5);
        REQUIRE(pooled[40 + i] == 0.0);
    }
}

TEST_CASE("pool_mfcc: rows r, 2r, 3r give mean 2r and std r*sqrt(2/3)") {
    std::vector<double> r(40);
    for (std::size_t i = 0; i < 40; ++i) r[i] = 0.25 + static_cast<double>(i) * 0.05;
    std::vector<double> r2 = r, r3 = r;
    for (std::size_t i = 0; i < 40; ++i) {
        r2[i] *= 2.0;
        r3[i] *= 3.0;
    }
    const auto pooled = midlevel::pool_mfcc(mfcc_of_rows({r, r2, r3}));
    for (std::size_t i = 0; i < 40; ++i) {
        REQUIRE(pooled[i] == Catch::Approx(2.0 * r[i]).margin(1e-12));
        REQUIRE(pooled[40 + i] == Catch::Approx(r[i] * std::sqrt(2.0 / 3.0)).margin(1e-12));
    }
}

TEST_CASE("train: constant targets are reproduced for any input") {
    Rng rng(1);
    std::vector<midlevel::TrainingRow> rows(10);
    for (auto& r : rows) {
        r.pooled = random_pooled(rng);
        for (int t = 0; t < kTargets; ++t) r.targets[static_cast<std::size_t>(t)] = 0.42;
    }
    const auto model = midlevel::train_midlevel(rows, 1.0);
    const auto pred = midlevel::predict_raw(model, random_pooled(rng));
    for (double v : pred) REQUIRE(v == Catch::Approx(0.42).margin(1e-9));
}

TEST_CASE("train: huge lambda collapses to target means") {
    Rng rng(2);
    std::vector<midlevel::TrainingRow> rows(20);
    std::array<double, kTargets> mean{};
    for (auto& r : rows) {
        r.pooled = random_pooled(rng);
        for (int t = 0; t < kTargets; ++t) {
            r.targets[static_cast<std::size_t>(t)] = rng.next_unit();
            mean[static_cast<std::size_t>(t)] += r.targets[static_cast<std::size_t>(t)] / 20.0;
        }
    }
    const auto model = midlevel::train_midlevel(rows, 1e9);
    const auto pred = midlevel::predict_raw(model, random_pooled(rng));
    for (int t = 0; t < kTargets; ++t)
        REQUIRE(pred[static_cast<std::size_t>(t)] ==
                Catch::Approx(mean[static_cast<std::size_t>(t)]).margin(1e-3));
}

TEST_CASE("train: noiseless linear targets are recovered to mse < 1e-6") {
    Rng rng(3);
    Matrix w(kPooledDim, kTargets);
    for (double& v : w.data) v = rng.next_range(-0.1, 0.1);
    std::vector<midlevel::TrainingRow> rows(200);
    for (auto& r : rows) {
        r.pooled = random_pooled(rng);
        for (int t = 0; t < kTargets; ++t) {
            double acc = 0.5;
            for (int d = 0; d < kPooledDim; ++d)
                acc += w.at(static_cast<std::size_t>(d), static_cast<std::size_t>(t)) *
                       r.pooled[static_cast<std::size_t>(d)];
            r.targets[static_cast<std::size_t>(t)] = acc;
        }
    }
    const auto model = midlevel::train_midlevel(rows, 1e-6);
    REQUIRE(mse(model, rows) < 1e-6);
    REQUIRE(model.training_mse < 1e-6);
}

TEST_CASE("train: reported mse never exceeds the constant-mean predictor") {
    Rng rng(4);
    std::vector<midlevel::TrainingRow> rows(30);
    std::array<double, kTargets> mean{};
    for (auto& r : rows) {
        r.pooled = random_pooled(rng);
        for (int t = 0; t < kTargets; ++t) {
            r.targets[static_cast<std::size_t>(t)] = rng.next_unit();
            mean[static_cast<std::size_t>(t)] += r.targets[static_cast<std::size_t>(t)] / 30.0;
        }
    }
    double constant_mse = 0.0;
    for (const auto& r : rows)
        for (int t = 0; t < kTargets; ++t) {
            const double d = r.targets[static_cast<std::size_t>(t)] - mean[static_cast<std::size_t>(t)];
            constant_mse += d * d;
        }
    constant_mse /= static_cast<double>(rows.size() * kTargets);

    for (double lambda : {0.0, 0.1, 1.0, 100.0}) {
        const auto model = midlevel::train_midlevel(rows, lambda);
        REQUIRE(model.training_mse <= constant_mse + 1e-12);
    }
}

TEST_CASE("train: lambda 0 training loss is never above lambda > 0") {
    Rng rng(5);
    std::vector<midlevel::TrainingRow> rows(120);
    for (auto& r : rows) {
        r.pooled = random_pooled(rng);
        for (int t = 0; t < kTargets; ++t) r.targets[static_cast<std::size_t>(t)] = rng.next_unit();
    }
    const auto loose = midlevel::train_midlevel(rows, 1e-9);
    for (double lambda : {0.5, 2.0, 50.0}) {
        const auto tight = midlevel::train_midlevel(rows, lambda);
        REQUIRE(loose.training_mse <= tight.training_mse + 1e-9);
    }
}

TEST_CASE("train: degenerate design falls back to a larger lambda") {
    std::vector<midlevel::TrainingRow> rows(3);
    for (auto& r : rows) {
        r.pooled.fill(1.0);  // all-constant inputs standardize to all-zero columns
        r.targets.fill(0.5);
    }
    const auto model = midlevel::train_midlevel(rows, 0.0);
    REQUIRE(model.lambda_fallback);
    REQUIRE(model.effective_lambda > 0.0);
    const auto pred = midlevel::predict_raw(model, rows[0].pooled);
    for (double v : pred) REQUIRE(v == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("predict: affine in the pooled vector before clamping") {
    Rng rng(6);
    std::vector<midlevel::TrainingRow> rows(25);
    for (auto& r : rows) {
        r.pooled = random_pooled(rng);
        for (int t = 0; t < kTargets; ++t) r.targets[static_cast<std::size_t>(t)] = rng.next_unit();
    }
    const auto model = midlevel::train_midlevel(rows, 1.0);
    const auto u = random_pooled(rng);
    const auto v = random_pooled(rng);
    const double a = 0.3;
    std::array<double, kPooledDim> blend{};
    for (int d = 0; d < kPooledDim; ++d)
        blend[static_cast<std::size_t>(d)] = a * u[static_cast<std::size_t>(d)] +
                                             (1.0 - a) * v[static_cast<std::size_t>(d)];
    const auto pu = midlevel::predict_raw(model, u);
    const auto pv = midlevel::predict_raw(model, v);
    const auto pb = midlevel::predict_raw(model, blend);
    for (int t = 0; t < kTargets; ++t)
        REQUIRE(pb[static_cast<std::size_t>(t)] ==
                Catch::Approx(a * pu[static_cast<std::size_t>(t)] +
                              (1.0 - a) * pv[static_cast<std::size_t>(t)])
                    .margin(1e-9));
}

TEST_CASE("predict: output has dimension 7 and clamps to [0,1]") {
    Rng rng(7);
    std::vector<midlevel::TrainingRow> rows(10);
    for (auto& r : rows) {
        r.pooled = random_pooled(rng);
        for (int t = 0; t < kTargets; ++t)
            r.targets[static_cast<std::size_t>(t)] = rng.next_unit() * 4.0 - 2.0;  // out of range
    }
    const auto model = midlevel::train_midlevel(rows, 0.01);
    std::vector<std::vector<double>> frames(3, std::vector<double>(40));
    for (auto& f : frames)
        for (double& v : f) v = rng.next_gauss();
    const auto out = midlevel::predict_midlevel(model, mfcc_of_rows(frames)).values();
    REQUIRE(out.size() == 7);
    for (double v : out) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
}

TEST_CASE("model json round-trips exactly") {
    test_util::TempDir dir("midlevel");
    Rng rng(8);
    std::vector<midlevel::TrainingRow> rows(12);
    for (auto& r : rows) {
        r.pooled = random_pooled(rng);
        for (int t = 0; t < kTargets; ++t) r.targets[static_cast<std::size_t>(t)] = rng.next_unit();
    }
    const auto model = midlevel::train_midlevel(rows, 2.5);
    midlevel::save(model, dir.str("m.json"));
    const auto loaded = midlevel::load(dir.str("m.json"));
    REQUIRE(midlevel::to_json(model).dump() == midlevel::to_json(loaded).dump());
    const auto p = random_pooled(rng);
    REQUIRE(midlevel::predict_raw(model, p) == midlevel::predict_raw(loaded, p));
}
