#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagscope/audio.hpp"
#include "tagscope/rng.hpp"
#include "tagscope/tabular.hpp"

namespace tagscope::synth {

// Seeded fixture corpus: tone/click/noise clips with known descriptor values,
// a 3-genre audio tree with chord annotations and mid-level targets, and a
// planted-signal tabular benchmark whose ground truth lives only in the
// signal-group columns.
struct Options {
    std::string out_dir;
    std::uint64_t seed = 42;
};

namespace detail {

inline std::vector<double> make_sine(int rate, double seconds, double freq, double amp) {
    const std::size_t n = static_cast<std::size_t>(seconds * rate);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i)
        s[i] = amp * std::sin(2.0 * 3.14159265358979323846 * freq * static_cast<double>(i) / rate);
    return s;
}

inline std::vector<double> make_click_track(int rate, double seconds, double bpm, double amp) {
    const std::size_t n = static_cast<std::size_t>(seconds * rate);
    std::vector<double> s(n, 0.0);
    const double period = 60.0 / bpm;
    constexpr std::size_t kBurst = 80;
    for (double t = 0.05; t < seconds; t += period) {
        const std::size_t start = static_cast<std::size_t>(t * rate);
        for (std::size_t i = 0; i < kBurst && start + i < n; ++i) {
            const double decay = 1.0 - static_cast<double>(i) / kBurst;
            s[start + i] += amp * decay *
                            std::cos(2.0 * 3.14159265358979323846 * 4000.0 * static_cast<double>(i) / rate);
        }
    }
    return s;
}

inline std::vector<double> make_noise(int rate, double seconds, double amp, Rng& rng) {
    const std::size_t n = static_cast<std::size_t>(seconds * rate);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = std::clamp(amp * rng.next_gauss(), -1.0, 1.0);
    return s;
}

// Four 1.5 s triad segments following I-IV-V7-I above the given root.
inline std::vector<double> make_tonal(int rate, double f0, Rng& rng) {
    const std::array<int, 4> degrees = {0, 5, 7, 0};
    std::vector<double> s;
    const double tremolo_hz = 0.4 + 0.4 * rng.next_unit();
    for (int seg = 0; seg < 4; ++seg) {
        const double root = f0 * std::pow(2.0, degrees[static_cast<std::size_t>(seg)] / 12.0);
        const std::array<double, 3> freqs = {root, root * std::pow(2.0, 4.0 / 12.0),
                                             root * std::pow(2.0, 7.0 / 12.0)};
        const std::size_t n = static_cast<std::size_t>(1.5 * rate);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / rate;
            double v = 0.0;
            for (double f : freqs) v += std::sin(2.0 * 3.14159265358979323846 * f * t);
            const double env = 1.0 + 0.2 * std::sin(2.0 * 3.14159265358979323846 * tremolo_hz * t);
            s.push_back(0.18 * env * v);
        }
    }
    return s;
}

inline const char* pitch_name(int pc) {
    static const char* names[12] = {"C",  "C#", "D",  "D#", "E",  "F",
                                    "F#", "G",  "G#", "A",  "A#", "B"};
    return names[((pc % 12) + 12) % 12];
}

}  // namespace detail

inline nlohmann::json generate(const Options& opt) {
    namespace fs = std::filesystem;
    const fs::path root(opt.out_dir);
    fs::create_directories(root / "audio");
    fs::create_directories(root / "chords");
    fs::create_directories(root / "planted");
    for (const char* g : {"tonal", "rhythmic", "noisy"}) fs::create_directories(root / "genres" / g);

    constexpr int kRate = audio::kCanonicalRate;
    nlohmann::json manifest;
    manifest["seed"] = opt.seed;

    // ---- descriptor oracle fixtures ----
    {
        nlohmann::json fixtures;
        audio::write_wav_mono((root / "audio" / "silence.wav").string(),
                              std::vector<double>(kRate, 0.0), kRate);
        fixtures["silence"] = {{"path", "audio/silence.wav"}, {"seconds", 1.0}};

        audio::write_wav_mono((root / "audio" / "sine_1000hz.wav").string(),
                              detail::make_sine(kRate, 10.0, 1000.0, 1.0), kRate);
        fixtures["sine_1000hz"] = {{"path", "audio/sine_1000hz.wav"},
                                   {"f0", 1000.0},
                                   {"seconds", 10.0},
                                   {"expected_zcr", 2000.0},
                                   {"expected_loudness_db", -3.0103}};

        audio::write_wav_mono((root / "audio" / "sine_100hz.wav").string(),
                              detail::make_sine(kRate, 10.0, 100.0, 1.0), kRate);
        fixtures["sine_100hz"] = {{"path", "audio/sine_100hz.wav"},
                                  {"f0", 100.0},
                                  {"seconds", 10.0},
                                  {"expected_zcr", 200.0}};

        {
            const auto mono = detail::make_sine(44100, 2.0, 440.0, 0.8);
            audio::write_wav((root / "audio" / "sine_440_stereo_44100.wav").string(), {mono, mono},
                             44100);
            fixtures["sine_440_stereo_44100"] = {{"path", "audio/sine_440_stereo_44100.wav"},
                                                 {"f0", 440.0},
                                                 {"source_rate", 44100},
                                                 {"channels", 2}};
        }
        audio::write_au_mono((root / "audio" / "sine_440.au").string(),
                             detail::make_sine(kRate, 3.0, 440.0, 0.8), kRate);
        fixtures["sine_440_au"] = {{"path", "audio/sine_440.au"}, {"f0", 440.0}, {"encoding", 3}};

        for (double bpm : {90.0, 120.0}) {
            const std::string name = bpm == 90.0 ? "click_090" : "click_120";
            audio::write_wav_mono((root / "audio" / (name + ".wav")).string(),
                                  detail::make_click_track(kRate, 15.0, bpm, 0.9), kRate);
            fixtures[name] = {{"path", "audio/" + name + ".wav"},
                              {"bpm", bpm},
                              {"expected_onset_rate", bpm / 60.0}};
        }
        {
            Rng rng(mix_seed(opt.seed, 101));
            audio::write_wav_mono((root / "audio" / "noise.wav").string(),
                                  detail::make_noise(kRate, 10.0, 0.25, rng), kRate);
            fixtures["noise"] = {{"path", "audio/noise.wav"},
                                 {"expected_rolloff", 0.85 * kRate / 2.0},
                                 {"flat_entropy_bits", std::log2(1025.0)}};
        }
        manifest["fixtures"] = fixtures;
    }

    // ---- reference chord progression ----
    {
        std::ofstream lab(root / "chords" / "cfg7c.lab");
        lab << "0.0 1.0 C:maj\n1.0 2.0 F:maj\n2.0 3.0 G:7\n3.0 4.0 C:maj\n";
        manifest["chords_fixture"] = {{"path", "chords/cfg7c.lab"},
                                      {"expected_dominants_ratio", 0.25},
                                      {"expected_subdominants_ratio", 0.25}};
    }

    // ---- three-genre audio corpus ----
    {
        Rng rng(mix_seed(opt.seed, 202));
        std::ofstream chords_manifest(root / "chords_manifest.tsv");
        std::ofstream midlevel_csv(root / "midlevel.csv");
        midlevel_csv << "clip_id";
        for (const auto& n : midlevel::MidLevelFeatures::names()) midlevel_csv << "," << n;
        midlevel_csv << "\n";

        const std::array<std::array<double, 7>, 3> genre_targets = {{
            {0.85, 0.30, 0.50, 0.30, 0.20, 0.85, 0.30},  // tonal
            {0.20, 0.90, 0.90, 0.70, 0.50, 0.40, 0.50},  // rhythmic
            {0.10, 0.50, 0.20, 0.60, 0.90, 0.10, 0.60},  // noisy
        }};
        const std::array<std::string, 3> genre_names = {"tonal", "rhythmic", "noisy"};

        nlohmann::json genre_info;
        for (std::size_t g = 0; g < 3; ++g) {
            for (int i = 0; i < 20; ++i) {
                char idbuf[32];
                std::snprintf(idbuf, sizeof(idbuf), "%s_%02d", genre_names[g].c_str(), i);
                const std::string id(idbuf);
                const fs::path wav = root / "genres" / genre_names[g] / (id + ".wav");

                if (g == 0) {
                    const int key_pc = static_cast<int>(rng.next_below(12));
                    const double f0 = 150.0 * std::pow(2.0, key_pc / 12.0) *
                                      (1.0 + rng.next_unit() * 0.4);
                    audio::write_wav_mono(wav.string(), detail::make_tonal(kRate, f0, rng), kRate);
                    std::ofstream lab(root / "chords" / (id + ".lab"));
                    const std::array<int, 4> degrees = {0, 5, 7, 0};
                    const std::array<const char*, 4> quality = {":maj", ":maj", ":7", ":maj"};
                    for (int seg = 0; seg < 4; ++seg)
                        lab << format_double(1.5 * seg) << " " << format_double(1.5 * (seg + 1))
                            << " " << detail::pitch_name(key_pc + degrees[static_cast<std::size_t>(seg)])
                            << quality[static_cast<std::size_t>(seg)] << "\n";
                    chords_manifest << id << "\tchords/" << id << ".lab\t"
                                    << detail::pitch_name(key_pc) << ":maj\t0\n";
                } else if (g == 1) {
                    const double bpm = 80.0 + rng.next_unit() * 80.0;
                    auto s = detail::make_click_track(kRate, 6.0, bpm, 0.9);
                    for (double& v : s) v = std::clamp(v + 0.01 * rng.next_gauss(), -1.0, 1.0);
                    audio::write_wav_mono(wav.string(), s, kRate);
                    chords_manifest << id << "\t-\t-\t0\n";
                } else {
                    const double amp = 0.1 + rng.next_unit() * 0.3;
                    audio::write_wav_mono(wav.string(), detail::make_noise(kRate, 6.0, amp, rng),
                                          kRate);
                    chords_manifest << id << "\t-\t-\t0.5\n";
                }

                midlevel_csv << id;
                for (double t : genre_targets[g]) {
                    const double jitter = (rng.next_unit() - 0.5) * 0.1;
                    midlevel_csv << "," << format_double(std::clamp(t + jitter, 0.0, 1.0));
                }
                midlevel_csv << "\n";
            }
            genre_info[genre_names[g]] = 20;
        }
        manifest["genres"] = genre_info;
        manifest["chords_manifest"] = "chords_manifest.tsv";
        manifest["midlevel_csv"] = "midlevel.csv";
    }

    // ---- planted-signal multilabel benchmark ----
    {
        constexpr std::size_t kRows = 2000;
        constexpr std::size_t kTags = 8;
        Rng rng(mix_seed(opt.seed, 303));
        const auto& names = tabular::canonical_feature_names();
        const auto& groups = tabular::feature_groups();

        std::vector<std::size_t> signal_cols, midlevel_cols;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (groups[i] == "signal") signal_cols.push_back(i);
            if (groups[i] == "midlevel") midlevel_cols.push_back(i);
        }

        struct TagPlan {
            std::vector<std::size_t> cols;
            std::vector<double> weights;
            std::size_t mid_col = 0;
            double mid_weight = 0.0;
        };
        std::vector<TagPlan> plans(kTags);
        nlohmann::json truth;
        for (std::size_t t = 0; t < kTags; ++t) {
            TagPlan& plan = plans[t];
            std::vector<std::size_t> pool = signal_cols;
            rng.shuffle(pool);
            plan.cols.assign(pool.begin(), pool.begin() + 4);
            std::sort(plan.cols.begin(), plan.cols.end());
            for (std::size_t c = 0; c < 4; ++c) {
                const double mag = 1.5 + rng.next_unit();
                plan.weights.push_back(rng.next_unit() < 0.5 ? -mag : mag);
            }
            plan.mid_col = midlevel_cols[rng.next_below(midlevel_cols.size())];
            plan.mid_weight = rng.next_unit() < 0.5 ? -0.4 : 0.4;

            nlohmann::json tag_truth;
            std::vector<std::string> col_names;
            for (std::size_t c : plan.cols) col_names.push_back(names[c]);
            tag_truth["columns"] = col_names;
            tag_truth["weights"] = plan.weights;
            tag_truth["midlevel_column"] = names[plan.mid_col];
            tag_truth["midlevel_weight"] = plan.mid_weight;
            truth["tag_" + std::to_string(t)] = tag_truth;
        }

        std::vector<tabular::FeatureVector> rows(kRows);
        std::ofstream labels_tsv(root / "planted" / "labels.tsv");
        for (std::size_t i = 0; i < kRows; ++i) {
            char idbuf[16];
            std::snprintf(idbuf, sizeof(idbuf), "syn_%04zu", i);
            rows[i].track_id = idbuf;
            rows[i].values.resize(names.size());
            for (double& v : rows[i].values) v = rng.next_gauss();

            labels_tsv << idbuf << "\t-";
            for (std::size_t t = 0; t < kTags; ++t) {
                double logit = 0.0;
                for (std::size_t c = 0; c < plans[t].cols.size(); ++c)
                    logit += plans[t].weights[c] * rows[i].values[plans[t].cols[c]];
                logit += plans[t].mid_weight * rows[i].values[plans[t].mid_col];
                logit += 0.3 * rng.next_gauss();
                if (logit > 0.0) labels_tsv << "\ttag_" << t;
            }
            labels_tsv << "\n";
        }
        tabular::write_store((root / "planted" / "store.csv").string(), rows);
        std::ofstream truth_out(root / "planted" / "truth.json");
        truth_out << truth.dump(2) << "\n";
        manifest["planted"] = {{"store", "planted/store.csv"},
                               {"labels", "planted/labels.tsv"},
                               {"truth", "planted/truth.json"},
                               {"rows", kRows},
                               {"tags", kTags}};
    }

    std::ofstream mout(root / "synth_manifest.json");
    if (!mout) throw Error("cannot write manifest under " + opt.out_dir);
    mout << manifest.dump(2) << "\n";
    return manifest;
}

}  // namespace tagscope::synth
