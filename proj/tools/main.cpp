// tagscope: batch CLI for the interpretable music tagging pipeline.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tagscope/audio.hpp"
#include "tagscope/explain.hpp"
#include "tagscope/gbdt.hpp"
#include "tagscope/harmony.hpp"
#include "tagscope/midlevel.hpp"
#include "tagscope/pipeline.hpp"
#include "tagscope/signal_features.hpp"
#include "tagscope/svg.hpp"
#include "tagscope/synth.hpp"
#include "tagscope/tabular.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tagscope;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadArgs = 2;
constexpr int kExitDataError = 3;
constexpr int kExitNumericError = 4;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write: " + path);
    out << text;
}

void write_json_file(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::vector<fs::path> find_audio_files(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) {
            const std::string ext = e.path().extension().string();
            if (ext == ".wav" || ext == ".au" || ext == ".WAV" || ext == ".AU")
                files.push_back(e.path());
        }
    std::sort(files.begin(), files.end());
    return files;
}

struct LabelArgs {
    std::string gtzan_dir;
    std::string labels_tsv;
    std::string task = "auto";
};

tabular::Dataset load_labels(const LabelArgs& args) {
    if (!args.gtzan_dir.empty() && !args.labels_tsv.empty())
        throw Error("give either --labels-gtzan or --labels-tsv, not both");
    if (args.gtzan_dir.empty() && args.labels_tsv.empty())
        throw Error("labels required: --labels-gtzan or --labels-tsv");
    tabular::Dataset ds = args.gtzan_dir.empty() ? tabular::load_jamendo(args.labels_tsv)
                                                 : tabular::load_gtzan(args.gtzan_dir);
    if (args.task == "multiclass") {
        ds.labels.task_kind = tabular::TaskKind::Multiclass;
        for (std::size_t i = 0; i < ds.labels.track_ids.size(); ++i) {
            double sum = 0.0;
            for (std::size_t t = 0; t < ds.labels.tag_names.size(); ++t)
                sum += ds.labels.indicators.at(i, t);
            if (sum != 1.0)
                throw Error("multiclass rows must carry exactly one tag (track '" +
                            ds.labels.track_ids[i] + "')");
        }
    } else if (args.task == "multilabel") {
        ds.labels.task_kind = tabular::TaskKind::Multilabel;
    }
    if (!ds.note.empty()) std::cerr << "note: " << ds.note << "\n";
    return ds;
}

std::vector<double> parse_fractions(const std::string& spec) {
    std::vector<double> f;
    std::stringstream ss(spec);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(std::stod(cell));
    return f;
}

gbdt::TrainParams params_from_cli(int trees, int max_depth, double learning_rate, double lambda,
                                  double gamma, double min_child_weight, double subsample,
                                  double colsample, std::uint64_t seed) {
    gbdt::TrainParams p;
    p.n_trees = trees;
    p.max_depth = max_depth;
    p.learning_rate = learning_rate;
    p.lambda = lambda;
    p.gamma = gamma;
    p.min_child_weight = min_child_weight;
    p.subsample = subsample;
    p.colsample = colsample;
    p.seed = seed;
    return p;
}

// ---- extract ------------------------------------------------------------------

int cmd_extract(const std::string& audio_dir, const std::string& chords_manifest,
                const std::string& midlevel_model_path, const std::string& out_store, int jobs) {
    const auto files = find_audio_files(audio_dir);
    if (files.empty()) throw Error("no audio files under " + audio_dir);
    {
        std::map<std::string, int> stems;
        for (const auto& f : files)
            if (++stems[f.stem().string()] > 1)
                throw DuplicateTrackId("duplicate track id: " + f.stem().string());
    }

    std::map<std::string, tabular::ChordsEntry> chords_by_id;
    if (!chords_manifest.empty()) chords_by_id = tabular::load_chords_manifest(chords_manifest);
    const fs::path chords_base = chords_manifest.empty()
                                     ? fs::path()
                                     : fs::path(chords_manifest).parent_path();

    const midlevel::MidLevelModel ml_model = midlevel::load(midlevel_model_path);

    std::vector<std::optional<tabular::FeatureVector>> results(files.size());
    std::vector<std::string> errors(files.size());

    auto process = [&](std::size_t i) {
        const std::string id = files[i].stem().string();
        try {
            const audio::AudioClip clip = audio::decode(files[i].string());

            std::vector<harmony::ChordEvent> chords;
            std::optional<harmony::KeyEstimate> key_override;
            std::optional<double> vocal;
            const auto entry = chords_by_id.find(id);
            if (entry != chords_by_id.end()) {
                if (!entry->second.lab_path.empty()) {
                    fs::path lab(entry->second.lab_path);
                    if (lab.is_relative() && !chords_base.empty()) lab = chords_base / lab;
                    chords = harmony::load_lab(lab.string());
                }
                key_override = entry->second.key_override;
                vocal = entry->second.vocal_flag;
            }

            const signal::SignalFeatures xs =
                signal::signal_descriptors(clip, chords.empty() ? nullptr : &chords, vocal);
            const midlevel::MidLevelFeatures xm =
                midlevel::predict_midlevel(ml_model, signal::mfcc(clip));
            harmony::HarmonicFeatures xh;
            if (!chords.empty()) {
                xh = harmony::harmonic_features_for(
                    chords, key_override.has_value() ? &*key_override : nullptr);
            } else {
                errors[i] = "";  // not an error; harmonic block zeroed
                std::cerr << "note: no chords for '" << id << "'; harmonic block zeroed\n";
            }
            results[i] = tabular::assemble(xh, xm, xs, id);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };

    if (jobs <= 1) {
        for (std::size_t i = 0; i < files.size(); ++i) process(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1))
                    process(i);
            });
        for (auto& t : workers) t.join();
    }

    std::vector<tabular::FeatureVector> rows;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (results[i].has_value()) {
            rows.push_back(std::move(*results[i]));
        } else {
            ++skipped;
            std::cerr << "skip: " << files[i].string() << ": " << errors[i] << "\n";
        }
    }
    if (rows.empty()) {
        std::cerr << "error: zero tracks extracted\n";
        return kExitDataError;
    }
    tabular::write_store(out_store, std::move(rows));
    std::cout << "extracted " << (files.size() - skipped) << " tracks, skipped " << skipped
              << " -> " << out_store << "\n";
    return kExitOk;
}

// ---- midlevel training ----------------------------------------------------------

int cmd_train_midlevel(const std::string& csv_path, const std::string& audio_dir,
                       const std::string& out_path, double ridge_lambda) {
    std::ifstream in(csv_path);
    if (!in) throw Error("cannot open midlevel csv: " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw Error("empty midlevel csv");

    std::map<std::string, fs::path> by_stem;
    for (const auto& f : find_audio_files(audio_dir)) by_stem[f.stem().string()] = f;

    std::vector<std::string> ids;
    std::vector<std::array<double, midlevel::kTargets>> raw_targets;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 1 + midlevel::kTargets)
            throw MalformedRow(csv_path + ": expected clip_id plus 7 targets", line_no);
        ids.push_back(cells[0]);
        std::array<double, midlevel::kTargets> t{};
        for (int k = 0; k < midlevel::kTargets; ++k)
            t[static_cast<std::size_t>(k)] = std::stod(cells[static_cast<std::size_t>(k + 1)]);
        raw_targets.push_back(t);
    }
    if (ids.size() < 2) throw Error("midlevel training needs at least 2 rows");

    // min-max scale targets to [0, 1] with the file's own extrema
    std::array<double, midlevel::kTargets> lo{}, hi{};
    for (int k = 0; k < midlevel::kTargets; ++k) {
        lo[static_cast<std::size_t>(k)] = raw_targets[0][static_cast<std::size_t>(k)];
        hi[static_cast<std::size_t>(k)] = raw_targets[0][static_cast<std::size_t>(k)];
    }
    for (const auto& t : raw_targets)
        for (int k = 0; k < midlevel::kTargets; ++k) {
            lo[static_cast<std::size_t>(k)] = std::min(lo[static_cast<std::size_t>(k)], t[static_cast<std::size_t>(k)]);
            hi[static_cast<std::size_t>(k)] = std::max(hi[static_cast<std::size_t>(k)], t[static_cast<std::size_t>(k)]);
        }

    std::vector<midlevel::TrainingRow> rows;
    std::size_t missing = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto f = by_stem.find(ids[i]);
        if (f == by_stem.end()) {
            ++missing;
            std::cerr << "skip: no audio for clip '" << ids[i] << "'\n";
            continue;
        }
        midlevel::TrainingRow row;
        row.pooled = midlevel::pool_mfcc(signal::mfcc(audio::decode(f->second.string())));
        for (int k = 0; k < midlevel::kTargets; ++k) {
            const double span = hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)];
            row.targets[static_cast<std::size_t>(k)] =
                span > 0.0 ? (raw_targets[i][static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)]) / span : 0.5;
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw Error("not enough decodable midlevel training clips");

    midlevel::MidLevelModel model = midlevel::train_midlevel(rows, ridge_lambda);
    model.target_min = lo;
    model.target_max = hi;
    midlevel::save(model, out_path);
    std::cout << "midlevel model on " << rows.size() << " clips (skipped " << missing
              << "), training mse " << format_double(model.training_mse) << " -> " << out_path
              << "\n";
    if (model.lambda_fallback)
        std::cerr << "note: degenerate design; lambda raised to "
                  << format_double(model.effective_lambda) << "\n";
    return kExitOk;
}

// ---- gbdt training ---------------------------------------------------------------

int cmd_train_gbdt(const std::string& store_path, const LabelArgs& label_args,
                   const std::string& split_spec, const gbdt::TrainParams& params,
                   const std::string& out_path, int jobs) {
    const auto rows = tabular::read_store(store_path);
    tabular::Dataset ds = load_labels(label_args);
    const tabular::LabelMatrix labels = pipeline::restrict_labels(ds.labels, rows);
    if (labels.track_ids.empty()) throw Error("no overlap between store and labels");

    const tabular::SplitSpec split = tabular::split(labels, parse_fractions(split_spec), params.seed);
    gbdt::TrainReport report;
    gbdt::BoostedModel model = pipeline::train_on_split(
        rows, labels, split, params, pipeline::all_columns(tabular::kFeatureDim),
        tabular::canonical_feature_names(), jobs, &report);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    gbdt::save(model, out_path);
    std::cout << "trained " << model.n_labels() << " boosters on " << split.train.size()
              << " tracks -> " << out_path << "\n";
    return kExitOk;
}

json metrics_to_json(const gbdt::Metrics& m, const gbdt::BoostedModel& model) {
    json j;
    if (m.macro_auc) j["macro_auc"] = *m.macro_auc;
    json per_label;
    for (std::size_t l = 0; l < m.per_label_auc.size(); ++l) {
        if (m.per_label_auc[l])
            per_label[model.label_names[l]] = *m.per_label_auc[l];
        else
            per_label[model.label_names[l]] = nullptr;
    }
    if (!m.per_label_auc.empty()) j["per_label_auc"] = per_label;
    if (m.accuracy) j["accuracy"] = *m.accuracy;
    if (!m.per_class_f1.empty()) {
        json f1;
        for (std::size_t l = 0; l < m.per_class_f1.size(); ++l)
            f1[model.label_names[l]] = m.per_class_f1[l];
        j["per_class_f1"] = f1;
    }
    if (!m.confusion.empty()) j["confusion"] = m.confusion;
    j["excluded_labels"] = m.excluded_labels;
    return j;
}

int cmd_evaluate(const std::string& store_path, const std::string& model_path,
                 const LabelArgs& label_args, const std::string& on, const std::string& out_path) {
    const auto rows = tabular::read_store(store_path);
    const gbdt::BoostedModel model = gbdt::load(model_path);
    tabular::Dataset ds = load_labels(label_args);
    const tabular::LabelMatrix labels = pipeline::restrict_labels(ds.labels, rows);

    std::vector<std::string> ids;
    if (on == "train")
        ids = model.split.train;
    else if (on == "validation")
        ids = model.split.validation;
    else if (on == "test")
        ids = model.split.test;
    else if (on == "all")
        ids = labels.track_ids;
    else
        throw Error("--on must be train, validation, test or all");
    if (ids.empty()) throw Error("selected split part is empty");

    const gbdt::Metrics m = pipeline::evaluate_on(model, rows, labels, ids,
                                                  pipeline::all_columns(model.n_features()));
    json j = metrics_to_json(m, model);
    j["on"] = on;
    j["n_rows"] = ids.size();
    j["task_kind"] = model.task_kind == tabular::TaskKind::Multilabel ? "multilabel" : "multiclass";
    if (!out_path.empty()) write_json_file(out_path, j);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

// ---- explain ----------------------------------------------------------------------

int cmd_explain(const std::string& store_path, const std::string& model_path,
                const LabelArgs& label_args, const std::string& method, const std::string& label,
                const std::string& track, std::size_t repeats, std::size_t sample_cap,
                std::uint64_t seed, const std::string& metric_name, const std::string& out_path,
                const std::string& svg_path) {
    const auto rows = tabular::read_store(store_path);
    const gbdt::BoostedModel model = gbdt::load(model_path);

    int label_index = -1;
    if (!label.empty()) {
        for (std::size_t l = 0; l < model.label_names.size(); ++l)
            if (model.label_names[l] == label) label_index = static_cast<int>(l);
        if (label_index < 0) throw Error("unknown label: " + label);
    }

    json out;
    std::vector<svg::Entry> bars;

    if (method == "shap" && !track.empty()) {
        const auto idx = pipeline::index_by_id(rows);
        const auto it = idx.find(track);
        if (it == idx.end()) throw Error("track not in store: " + track);
        const std::vector<double>& x = rows[it->second].values;

        std::size_t l;
        if (label_index >= 0) {
            l = static_cast<std::size_t>(label_index);
        } else {
            const std::vector<double> margins = gbdt::predict_margin(model, x);
            l = 0;
            for (std::size_t k = 1; k < margins.size(); ++k)
                if (margins[k] > margins[l]) l = k;
        }
        const explain::ShapExplanation ex = explain::shap_values(model, x, l);
        out["method"] = "shap";
        out["track"] = track;
        out["label"] = ex.label;
        out["base_value"] = ex.base_value;
        out["margin"] = ex.margin;
        json phi;
        for (std::size_t f = 0; f < ex.phi.size(); ++f) phi[model.feature_names[f]] = ex.phi[f];
        out["phi"] = phi;
        for (std::size_t f = 0; f < ex.phi.size(); ++f)
            bars.push_back({model.feature_names[f], ex.phi[f]});
    } else {
        explain::ImportanceReport report;
        if (method == "weight" || method == "gain") {
            report = explain::weight_importance(model, label_index, method == "gain");
        } else if (method == "shap") {
            Matrix x(rows.size(), model.n_features());
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t f = 0; f < model.n_features(); ++f) x.at(i, f) = rows[i].values[f];
            report = explain::shap_summary(model, x, label_index, sample_cap, seed);
        } else if (method == "permutation") {
            tabular::Dataset ds = load_labels(label_args);
            const tabular::LabelMatrix labels = pipeline::restrict_labels(ds.labels, rows);
            std::vector<std::string> ids = model.split.test;
            if (ids.empty()) ids = labels.track_ids;
            const pipeline::Part part = pipeline::materialize(rows, labels, ids,
                                                              pipeline::all_columns(model.n_features()));
            explain::Metric metric = explain::Metric::MacroAuc;
            if (metric_name == "accuracy" ||
                (metric_name == "auto" && model.task_kind == tabular::TaskKind::Multiclass))
                metric = explain::Metric::Accuracy;
            report = explain::permutation_importance(model, part.x, part.y, metric, repeats, seed);
        } else {
            throw Error("unknown method: " + method);
        }
        out["method"] = report.method;
        out["scope"] = report.scope;
        json scores;
        for (std::size_t f = 0; f < report.scores.size(); ++f)
            scores[model.feature_names[f]] = report.scores[f];
        out["scores"] = scores;
        if (!report.dispersion.empty()) {
            json disp;
            for (std::size_t f = 0; f < report.dispersion.size(); ++f)
                disp[model.feature_names[f]] = report.dispersion[f];
            out["dispersion"] = disp;
        }
        for (std::size_t f = 0; f < report.scores.size(); ++f)
            bars.push_back({model.feature_names[f], report.scores[f]});
    }

    if (!out_path.empty()) write_json_file(out_path, out);
    std::cout << out.dump(2) << "\n";
    if (!svg_path.empty())
        write_text(svg_path, svg::bar_chart(bars, "tagscope " + method + " importance"));
    return kExitOk;
}

// ---- ablate -----------------------------------------------------------------------

int cmd_ablate(const std::string& store_path, const LabelArgs& label_args,
               const std::string& split_spec, const gbdt::TrainParams& params,
               const std::string& out_path, const std::string& svg_path, int jobs) {
    const auto rows = tabular::read_store(store_path);
    tabular::Dataset ds = load_labels(label_args);
    const tabular::LabelMatrix labels = pipeline::restrict_labels(ds.labels, rows);
    const tabular::SplitSpec split = tabular::split(labels, parse_fractions(split_spec), params.seed);

    // group tags come from the store manifest
    std::ifstream min(tabular::manifest_path_for(store_path));
    if (!min) throw Error("missing store manifest: " + tabular::manifest_path_for(store_path));
    json manifest;
    min >> manifest;
    const auto names = manifest.at("feature_names").get<std::vector<std::string>>();
    std::vector<std::string> group_of;
    for (const auto& nme : names) group_of.push_back(manifest.at("groups").at(nme).get<std::string>());

    const explain::AblationReport report =
        explain::ablation(rows, labels, split, params, names, group_of, jobs);

    json j;
    j["rows"] = json::array();
    std::vector<svg::Entry> bars;
    for (const auto& row : report.rows) {
        json r;
        r["name"] = row.name;
        r["groups"] = row.groups;
        r["metric_name"] = row.metric_name;
        if (row.metric)
            r["metric"] = *row.metric;
        else
            r["metric"] = nullptr;
        r["n_features"] = row.n_features;
        r["params_hash"] = row.params_hash;
        if (!row.error.empty()) r["error"] = row.error;
        j["rows"].push_back(r);
        bars.push_back({row.name, row.metric.value_or(0.0)});
    }
    if (!out_path.empty()) write_json_file(out_path, j);
    std::cout << j.dump(2) << "\n";
    if (!svg_path.empty()) write_text(svg_path, svg::bar_chart(bars, "tagscope feature-group ablation"));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tagscope: interpretable music tagging pipeline"};
    app.require_subcommand(1);

    // extract
    auto* extract = app.add_subcommand("extract", "extract 62-dim feature vectors to a CSV store");
    std::string audio_dir, chords_manifest, midlevel_model, out_store;
    int jobs = 1;
    extract->add_option("--audio-dir", audio_dir, "directory of .wav/.au files")->required();
    extract->add_option("--chords", chords_manifest, "chords manifest TSV (id, lab path, key, vocal)");
    extract->add_option("--midlevel-model", midlevel_model, "trained mid-level model JSON")->required();
    extract->add_option("--out", out_store, "output store CSV path")->required();
    extract->add_option("--jobs", jobs, "worker threads")->envname("TAGSCOPE_JOBS");

    // train
    auto* train = app.add_subcommand("train", "train the tagger (or the mid-level model)");
    std::string kind = "gbdt", store_path, model_out, split_spec = "0.8,0.1,0.1";
    std::string midlevel_csv, midlevel_audio_dir;
    double ridge_lambda = 1.0;
    LabelArgs label_args;
    int trees = 200, max_depth = 6;
    double learning_rate = 0.1, lambda = 1.0, gamma = 0.0, min_child_weight = 1.0, subsample = 0.8,
           colsample = 0.8;
    std::uint64_t seed = 42;
    train->add_option("--kind", kind, "gbdt | midlevel")->check(CLI::IsMember({"gbdt", "midlevel"}));
    train->add_option("--store", store_path, "feature store CSV");
    train->add_option("--labels-gtzan", label_args.gtzan_dir, "GTZAN-style genre directory");
    train->add_option("--labels-tsv", label_args.labels_tsv, "TSV: id, path, tags...");
    train->add_option("--task", label_args.task, "auto | multilabel | multiclass")
        ->check(CLI::IsMember({"auto", "multilabel", "multiclass"}));
    train->add_option("--split", split_spec, "train,validation,test fractions");
    train->add_option("--seed", seed, "random seed");
    train->add_option("--trees", trees, "boosting rounds per label");
    train->add_option("--max-depth", max_depth, "tree depth cap");
    train->add_option("--learning-rate", learning_rate, "shrinkage");
    train->add_option("--lambda", lambda, "L2 leaf regularization");
    train->add_option("--gamma", gamma, "minimum split gain");
    train->add_option("--min-child-weight", min_child_weight, "minimum child hessian");
    train->add_option("--subsample", subsample, "row sampling fraction per tree");
    train->add_option("--colsample", colsample, "column sampling fraction per tree");
    train->add_option("--jobs", jobs, "worker threads")->envname("TAGSCOPE_JOBS");
    train->add_option("--out", model_out, "output model JSON")->required();
    train->add_option("--midlevel-csv", midlevel_csv, "mid-level targets CSV (kind=midlevel)");
    train->add_option("--audio-dir", midlevel_audio_dir, "audio for mid-level training (kind=midlevel)");
    train->add_option("--ridge-lambda", ridge_lambda, "ridge strength (kind=midlevel)");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "evaluate a trained model");
    std::string eval_store, eval_model, eval_on = "test", eval_out;
    LabelArgs eval_labels;
    evaluate->add_option("--store", eval_store, "feature store CSV")->required();
    evaluate->add_option("--model", eval_model, "model JSON")->required();
    evaluate->add_option("--labels-gtzan", eval_labels.gtzan_dir, "GTZAN-style genre directory");
    evaluate->add_option("--labels-tsv", eval_labels.labels_tsv, "TSV: id, path, tags...");
    evaluate->add_option("--task", eval_labels.task, "auto | multilabel | multiclass");
    evaluate->add_option("--on", eval_on, "train | validation | test | all");
    evaluate->add_option("--out", eval_out, "metrics JSON path");

    // explain
    auto* explain_cmd = app.add_subcommand("explain", "feature importance and SHAP explanations");
    std::string ex_store, ex_model, ex_method = "shap", ex_label, ex_track, ex_out, ex_svg,
                ex_metric = "auto";
    std::size_t ex_repeats = 5, ex_sample = 2000;
    std::uint64_t ex_seed = 42;
    LabelArgs ex_labels;
    explain_cmd->add_option("--store", ex_store, "feature store CSV")->required();
    explain_cmd->add_option("--model", ex_model, "model JSON")->required();
    explain_cmd->add_option("--method", ex_method, "weight | gain | permutation | shap")
        ->check(CLI::IsMember({"weight", "gain", "permutation", "shap"}));
    explain_cmd->add_option("--label", ex_label, "restrict to one label");
    explain_cmd->add_option("--track", ex_track, "single-instance SHAP for this track id");
    explain_cmd->add_option("--repeats", ex_repeats, "permutation repeats");
    explain_cmd->add_option("--sample", ex_sample, "SHAP summary sample cap");
    explain_cmd->add_option("--seed", ex_seed, "random seed");
    explain_cmd->add_option("--metric", ex_metric, "auto | macro_auc | accuracy");
    explain_cmd->add_option("--labels-gtzan", ex_labels.gtzan_dir, "labels (permutation only)");
    explain_cmd->add_option("--labels-tsv", ex_labels.labels_tsv, "labels (permutation only)");
    explain_cmd->add_option("--task", ex_labels.task, "auto | multilabel | multiclass");
    explain_cmd->add_option("--out", ex_out, "report JSON path");
    explain_cmd->add_option("--svg", ex_svg, "bar chart SVG path");

    // ablate
    auto* ablate = app.add_subcommand("ablate", "feature-group ablation study");
    std::string ab_store, ab_out, ab_svg, ab_split = "0.8,0.1,0.1";
    LabelArgs ab_labels;
    int ab_trees = 200, ab_max_depth = 6;
    double ab_lr = 0.1, ab_lambda = 1.0, ab_gamma = 0.0, ab_mcw = 1.0, ab_sub = 0.8, ab_col = 0.8;
    std::uint64_t ab_seed = 42;
    ablate->add_option("--store", ab_store, "feature store CSV")->required();
    ablate->add_option("--labels-gtzan", ab_labels.gtzan_dir, "GTZAN-style genre directory");
    ablate->add_option("--labels-tsv", ab_labels.labels_tsv, "TSV: id, path, tags...");
    ablate->add_option("--task", ab_labels.task, "auto | multilabel | multiclass");
    ablate->add_option("--split", ab_split, "train,validation,test fractions");
    ablate->add_option("--seed", ab_seed, "random seed");
    ablate->add_option("--trees", ab_trees, "boosting rounds per label");
    ablate->add_option("--max-depth", ab_max_depth, "tree depth cap");
    ablate->add_option("--learning-rate", ab_lr, "shrinkage");
    ablate->add_option("--lambda", ab_lambda, "L2 leaf regularization");
    ablate->add_option("--gamma", ab_gamma, "minimum split gain");
    ablate->add_option("--min-child-weight", ab_mcw, "minimum child hessian");
    ablate->add_option("--subsample", ab_sub, "row sampling fraction per tree");
    ablate->add_option("--colsample", ab_col, "column sampling fraction per tree");
    ablate->add_option("--jobs", jobs, "worker threads")->envname("TAGSCOPE_JOBS");
    ablate->add_option("--out", ab_out, "report JSON path");
    ablate->add_option("--svg", ab_svg, "bar chart SVG path");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate the seeded synthetic fixture corpus");
    std::string synth_out;
    std::uint64_t synth_seed = 42;
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--seed", synth_seed, "random seed");

    // features
    auto* features = app.add_subcommand("features", "print the canonical 62 feature names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadArgs;
    }

    try {
        if (extract->parsed())
            return cmd_extract(audio_dir, chords_manifest, midlevel_model, out_store, jobs);
        if (train->parsed()) {
            if (kind == "midlevel") {
                if (midlevel_csv.empty() || midlevel_audio_dir.empty())
                    throw CLI::ValidationError("--midlevel-csv and --audio-dir required for kind=midlevel");
                return cmd_train_midlevel(midlevel_csv, midlevel_audio_dir, model_out, ridge_lambda);
            }
            if (store_path.empty())
                throw CLI::ValidationError("--store required for kind=gbdt");
            return cmd_train_gbdt(store_path, label_args, split_spec,
                                  params_from_cli(trees, max_depth, learning_rate, lambda, gamma,
                                                  min_child_weight, subsample, colsample, seed),
                                  model_out, jobs);
        }
        if (evaluate->parsed())
            return cmd_evaluate(eval_store, eval_model, eval_labels, eval_on, eval_out);
        if (explain_cmd->parsed())
            return cmd_explain(ex_store, ex_model, ex_labels, ex_method, ex_label, ex_track,
                               ex_repeats, ex_sample, ex_seed, ex_metric, ex_out, ex_svg);
        if (ablate->parsed())
            return cmd_ablate(ab_store, ab_labels, ab_split,
                              params_from_cli(ab_trees, ab_max_depth, ab_lr, ab_lambda, ab_gamma,
                                              ab_mcw, ab_sub, ab_col, ab_seed),
                              ab_out, ab_svg, jobs);
        if (synth_cmd->parsed()) {
            synth::generate({synth_out, synth_seed});
            std::cout << "synthetic corpus -> " << synth_out << "\n";
            return kExitOk;
        }
        if (features->parsed()) {
            const auto& names = tabular::canonical_feature_names();
            const auto& groups = tabular::feature_groups();
            for (std::size_t i = 0; i < names.size(); ++i)
                std::cout << names[i] << "\t" << groups[i] << "\n";
            return kExitOk;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadArgs;
    } catch (const NumericFailure& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumericError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitOk;
}
