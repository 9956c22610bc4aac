#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tagscope/common.hpp"
#include "tagscope/signal_features.hpp"

namespace tagscope::midlevel {

constexpr int kPooledDim = 80;  // per-coefficient mean + std
constexpr int kTargets = 7;

struct MidLevelFeatures {
    double melodiousness = 0.0;
    double articulation = 0.0;
    double rhythmic_stability = 0.0;
    double rhythmic_complexity = 0.0;
    double dissonance = 0.0;
    double tonal_stability = 0.0;
    double minorness = 0.0;

    static constexpr int kDim = kTargets;

    static const std::array<std::string, kDim>& names() {
        static const std::array<std::string, kDim> n = {
            "melodiousness",      "articulation", "rhythmic_stability", "rhythmic_complexity",
            "dissonance",         "tonal_stability", "minorness"};
        return n;
    }

    std::array<double, kDim> values() const {
        return {melodiousness, articulation,    rhythmic_stability, rhythmic_complexity,
                dissonance,    tonal_stability, minorness};
    }

    static MidLevelFeatures from_values(const std::array<double, kDim>& v) {
        return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    }
};

// Ridge regressor over pooled MFCC statistics; the I/O contract is seven
// scalars in [0, 1] from the first 15 seconds of audio.
struct MidLevelModel {
    Matrix weights;                       // kPooledDim x kTargets, standardized input space
    std::array<double, kTargets> bias{};  // per-target intercept
    std::array<double, kPooledDim> input_mean{};
    std::array<double, kPooledDim> input_std{};  // 0 marks a constant dimension
    double ridge_lambda = 1.0;                   // requested
    double effective_lambda = 1.0;               // after any degeneracy fallback
    bool lambda_fallback = false;
    std::array<double, kTargets> target_min{};  // original-scale extrema for inverse mapping
    std::array<double, kTargets> target_max{};
    double training_mse = 0.0;
};

// Per-coefficient mean (40) then population std (40) over frames.
inline std::array<double, kPooledDim> pool_mfcc(const signal::MfccMatrix& k) {
    const std::size_t s = k.frame_count();
    const std::size_t p = k.coeff_count();
    std::array<double, kPooledDim> out{};
    if (s == 0) return out;
    for (std::size_t c = 0; c < p; ++c) {
        double lo = k.coefficients.at(0, c), hi = lo;
        double mean = 0.0;
        for (std::size_t t = 0; t < s; ++t) {
            const double v = k.coefficients.at(t, c);
            mean += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (lo == hi) {  // constant column: exactly zero spread
            out[c] = lo;
            out[40 + c] = 0.0;
            continue;
        }
        mean /= static_cast<double>(s);
        double var = 0.0;
        for (std::size_t t = 0; t < s; ++t) {
            const double d = k.coefficients.at(t, c) - mean;
            var += d * d;
        }
        out[c] = mean;
        out[40 + c] = std::sqrt(var / static_cast<double>(s));
    }
    return out;
}

struct TrainingRow {
    std::array<double, kPooledDim> pooled{};
    std::array<double, kTargets> targets{};  // already scaled to [0, 1]
};

// Closed-form ridge per target on standardized inputs. A singular normal
// matrix (possible only at lambda ~ 0) falls back to a larger lambda and
// reports it via lambda_fallback.
inline MidLevelModel train_midlevel(const std::vector<TrainingRow>& rows, double ridge_lambda = 1.0) {
    if (rows.size() < 2) throw Error("need at least 2 training rows");
    const std::size_t n = rows.size();

    MidLevelModel model;
    model.ridge_lambda = ridge_lambda;
    for (int t = 0; t < kTargets; ++t) {
        model.target_min[static_cast<std::size_t>(t)] = 0.0;
        model.target_max[static_cast<std::size_t>(t)] = 1.0;
    }

    for (int d = 0; d < kPooledDim; ++d) {
        double mean = 0.0;
        for (const auto& r : rows) mean += r.pooled[static_cast<std::size_t>(d)];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& r : rows) {
            const double diff = r.pooled[static_cast<std::size_t>(d)] - mean;
            var += diff * diff;
        }
        model.input_mean[static_cast<std::size_t>(d)] = mean;
        model.input_std[static_cast<std::size_t>(d)] = std::sqrt(var / static_cast<double>(n));
    }

    Eigen::MatrixXd z(static_cast<long>(n), kPooledDim);
    for (std::size_t i = 0; i < n; ++i)
        for (int d = 0; d < kPooledDim; ++d) {
            const double sd = model.input_std[static_cast<std::size_t>(d)];
            z(static_cast<long>(i), d) =
                sd > 0.0 ? (rows[i].pooled[static_cast<std::size_t>(d)] -
                            model.input_mean[static_cast<std::size_t>(d)]) / sd
                         : 0.0;
        }
    Eigen::MatrixXd y(static_cast<long>(n), kTargets);
    for (std::size_t i = 0; i < n; ++i)
        for (int t = 0; t < kTargets; ++t) y(static_cast<long>(i), t) = rows[i].targets[static_cast<std::size_t>(t)];

    const Eigen::RowVectorXd y_mean = y.colwise().mean();
    const Eigen::MatrixXd yc = y.rowwise() - y_mean;
    const Eigen::MatrixXd gram = z.transpose() * z;
    const Eigen::MatrixXd zty = z.transpose() * yc;

    double lambda = ridge_lambda;
    Eigen::MatrixXd w;
    for (int attempt = 0;; ++attempt) {
        Eigen::MatrixXd normal = gram;
        normal.diagonal().array() += std::max(lambda, 0.0);
        Eigen::LLT<Eigen::MatrixXd> llt(normal);
        if (llt.info() == Eigen::Success) {
            w = llt.solve(zty);
            break;
        }
        if (attempt >= 20) throw Error("ridge solve failed even with large lambda");
        lambda = lambda <= 0.0 ? 1e-8 : lambda * 10.0;
        model.lambda_fallback = true;
    }
    model.effective_lambda = lambda;

    model.weights = Matrix(kPooledDim, kTargets);
    for (int d = 0; d < kPooledDim; ++d)
        for (int t = 0; t < kTargets; ++t)
            model.weights.at(static_cast<std::size_t>(d), static_cast<std::size_t>(t)) = w(d, t);
    for (int t = 0; t < kTargets; ++t) model.bias[static_cast<std::size_t>(t)] = y_mean(t);

    const Eigen::MatrixXd residual = yc - z * w;
    model.training_mse = residual.squaredNorm() / static_cast<double>(n * kTargets);
    return model;
}

// Affine prediction on a pooled vector, before the [0, 1] clamp.
inline std::array<double, kTargets> predict_raw(const MidLevelModel& model,
                                                const std::array<double, kPooledDim>& pooled) {
    std::array<double, kTargets> out = model.bias;
    for (int d = 0; d < kPooledDim; ++d) {
        const double sd = model.input_std[static_cast<std::size_t>(d)];
        if (sd <= 0.0) continue;
        const double zd = (pooled[static_cast<std::size_t>(d)] - model.input_mean[static_cast<std::size_t>(d)]) / sd;
        for (int t = 0; t < kTargets; ++t)
            out[static_cast<std::size_t>(t)] +=
                zd * model.weights.at(static_cast<std::size_t>(d), static_cast<std::size_t>(t));
    }
    return out;
}

inline MidLevelFeatures predict_midlevel(const MidLevelModel& model, const signal::MfccMatrix& k) {
    std::array<double, kTargets> raw = predict_raw(model, pool_mfcc(k));
    for (double& v : raw) v = std::clamp(v, 0.0, 1.0);
    return MidLevelFeatures::from_values(raw);
}

// ---- persistence ------------------------------------------------------------

inline nlohmann::json to_json(const MidLevelModel& m) {
    nlohmann::json j;
    j["kind"] = "midlevel-ridge";
    j["ridge_lambda"] = m.ridge_lambda;
    j["effective_lambda"] = m.effective_lambda;
    j["lambda_fallback"] = m.lambda_fallback;
    j["bias"] = m.bias;
    j["input_mean"] = m.input_mean;
    j["input_std"] = m.input_std;
    j["target_min"] = m.target_min;
    j["target_max"] = m.target_max;
    j["target_names"] = MidLevelFeatures::names();
    j["training_mse"] = m.training_mse;
    std::vector<std::vector<double>> w(kPooledDim, std::vector<double>(kTargets));
    for (int d = 0; d < kPooledDim; ++d)
        for (int t = 0; t < kTargets; ++t)
            w[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)] =
                m.weights.at(static_cast<std::size_t>(d), static_cast<std::size_t>(t));
    j["weights"] = w;
    return j;
}

inline MidLevelModel from_json(const nlohmann::json& j) {
    MidLevelModel m;
    m.ridge_lambda = j.at("ridge_lambda").get<double>();
    m.effective_lambda = j.at("effective_lambda").get<double>();
    m.lambda_fallback = j.at("lambda_fallback").get<bool>();
    m.bias = j.at("bias").get<std::array<double, kTargets>>();
    m.input_mean = j.at("input_mean").get<std::array<double, kPooledDim>>();
    m.input_std = j.at("input_std").get<std::array<double, kPooledDim>>();
    m.target_min = j.at("target_min").get<std::array<double, kTargets>>();
    m.target_max = j.at("target_max").get<std::array<double, kTargets>>();
    m.training_mse = j.value("training_mse", 0.0);
    const auto w = j.at("weights").get<std::vector<std::vector<double>>>();
    if (w.size() != kPooledDim) throw Error("midlevel model: bad weight shape");
    m.weights = Matrix(kPooledDim, kTargets);
    for (int d = 0; d < kPooledDim; ++d) {
        if (w[static_cast<std::size_t>(d)].size() != kTargets) throw Error("midlevel model: bad weight shape");
        for (int t = 0; t < kTargets; ++t)
            m.weights.at(static_cast<std::size_t>(d), static_cast<std::size_t>(t)) =
                w[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)];
    }
    return m;
}

inline void save(const MidLevelModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write model: " + path);
    out << to_json(m).dump(2) << "\n";
}

inline MidLevelModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model: " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

}  // namespace tagscope::midlevel
