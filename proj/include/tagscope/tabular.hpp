#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagscope/common.hpp"
#include "tagscope/harmony.hpp"
#include "tagscope/midlevel.hpp"
#include "tagscope/rng.hpp"
#include "tagscope/signal_features.hpp"

namespace tagscope::tabular {

constexpr int kFeatureDim = 62;  // 32 harmonic + 7 mid-level + 23 signal
constexpr double kScalerEpsilon = 1e-12;

// Canonical feature order: harmonic block, mid-level block, signal block.
inline const std::vector<std::string>& canonical_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& s : harmony::HarmonicFeatures::names()) n.push_back(s);
        for (const auto& s : midlevel::MidLevelFeatures::names()) n.push_back(s);
        for (const auto& s : signal::SignalFeatures::names()) n.push_back(s);
        return n;
    }();
    return names;
}

// Group tag per canonical feature, for ablation masks and reports.
inline const std::vector<std::string>& feature_groups() {
    static const std::vector<std::string> groups = [] {
        std::vector<std::string> g;
        for (int i = 0; i < harmony::HarmonicFeatures::kDim; ++i) g.emplace_back("harmonic");
        for (int i = 0; i < midlevel::MidLevelFeatures::kDim; ++i) g.emplace_back("midlevel");
        for (int i = 0; i < signal::SignalFeatures::kDim; ++i) g.emplace_back("signal");
        return g;
    }();
    return groups;
}

struct FeatureVector {
    std::string track_id;
    std::vector<double> values;  // kFeatureDim, canonical order
};

inline FeatureVector assemble(const harmony::HarmonicFeatures& xh,
                              const midlevel::MidLevelFeatures& xm,
                              const signal::SignalFeatures& xs, const std::string& track_id) {
    FeatureVector v;
    v.track_id = track_id;
    v.values.reserve(kFeatureDim);
    for (double x : xh.values()) v.values.push_back(x);
    for (double x : xm.values()) v.values.push_back(x);
    for (double x : xs.values()) v.values.push_back(x);
    return v;
}

// ---- standard scaler --------------------------------------------------------

struct StandardScaler {
    std::vector<double> mean;
    std::vector<double> std_dev;  // population std

    void fit(const std::vector<FeatureVector>& rows) {
        if (rows.empty()) throw Error("cannot fit scaler on empty data");
        const std::size_t d = rows[0].values.size();
        mean.assign(d, 0.0);
        std_dev.assign(d, 0.0);
        std::vector<double> lo = rows[0].values, hi = rows[0].values;
        for (const auto& r : rows)
            for (std::size_t i = 0; i < d; ++i) {
                mean[i] += r.values[i];
                lo[i] = std::min(lo[i], r.values[i]);
                hi[i] = std::max(hi[i], r.values[i]);
            }
        for (std::size_t i = 0; i < d; ++i) mean[i] /= static_cast<double>(rows.size());
        for (const auto& r : rows)
            for (std::size_t i = 0; i < d; ++i) {
                const double diff = r.values[i] - mean[i];
                std_dev[i] += diff * diff;
            }
        for (std::size_t i = 0; i < d; ++i) {
            if (lo[i] == hi[i]) {  // constant column: pin to the exact value
                mean[i] = lo[i];
                std_dev[i] = 0.0;
            } else {
                std_dev[i] = std::sqrt(std_dev[i] / static_cast<double>(rows.size()));
            }
        }
    }

    std::vector<double> transform(const std::vector<double>& v) const {
        if (v.size() != mean.size()) throw DimensionMismatch("scaler dimension mismatch");
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            out[i] = (v[i] - mean[i]) / std::max(std_dev[i], kScalerEpsilon);
        return out;
    }
};

inline StandardScaler fit_scaler(const std::vector<FeatureVector>& rows) {
    StandardScaler s;
    s.fit(rows);
    return s;
}

// ---- labels -------------------------------------------------------------------

enum class TaskKind { Multilabel, Multiclass };

struct LabelMatrix {
    std::vector<std::string> track_ids;
    std::vector<std::string> tag_names;
    Matrix indicators;  // rows align with track_ids
    TaskKind task_kind = TaskKind::Multilabel;
};

struct Dataset {
    std::vector<std::string> track_ids;
    std::vector<std::string> paths;
    LabelMatrix labels;
    std::string note;
};

namespace detail {

inline bool is_audio_file(const std::filesystem::path& p) {
    const std::string ext = p.extension().string();
    return ext == ".wav" || ext == ".au" || ext == ".WAV" || ext == ".AU";
}

inline std::vector<std::string> split_tsv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == '\t') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace detail

// GTZAN-style layout: root/<genre>/<audio files>; one-hot multiclass labels.
inline Dataset load_gtzan(const std::string& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw Error("not a directory: " + root);

    std::vector<std::string> genres;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) genres.push_back(e.path().filename().string());
    std::sort(genres.begin(), genres.end());
    if (genres.empty()) throw EmptyGenreDir("no genre directories under " + root);

    Dataset ds;
    ds.labels.task_kind = TaskKind::Multiclass;
    ds.labels.tag_names = genres;
    std::vector<std::size_t> genre_of;
    std::set<std::string> seen;
    for (std::size_t g = 0; g < genres.size(); ++g) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(fs::path(root) / genres[g]))
            if (e.is_regular_file() && detail::is_audio_file(e.path())) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw EmptyGenreDir("no audio files in genre '" + genres[g] + "'");
        for (const auto& p : files) {
            const std::string id = p.stem().string();
            if (!seen.insert(id).second) throw DuplicateTrackId("duplicate track id: " + id);
            ds.track_ids.push_back(id);
            ds.paths.push_back(p.string());
            genre_of.push_back(g);
        }
    }
    ds.labels.track_ids = ds.track_ids;
    ds.labels.indicators = Matrix(ds.track_ids.size(), genres.size());
    for (std::size_t i = 0; i < genre_of.size(); ++i) ds.labels.indicators.at(i, genre_of[i]) = 1.0;
    return ds;
}

// Tab-separated rows: track id, path, then zero or more tags.
inline Dataset load_jamendo(const std::string& tsv_path) {
    std::ifstream in(tsv_path);
    if (!in) throw Error("cannot open labels file: " + tsv_path);

    Dataset ds;
    ds.labels.task_kind = TaskKind::Multilabel;
    std::vector<std::vector<std::string>> row_tags;
    std::set<std::string> vocab;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = detail::split_tsv(line);
        if (line_no == 1 && !cells.empty() && (cells[0] == "track_id" || cells[0] == "TRACK_ID"))
            continue;  // header
        if (cells.size() < 2 || cells[0].empty() || cells[1].empty())
            throw MalformedRow(tsv_path + ": expected 'id<TAB>path[<TAB>tags...]'", line_no);
        ds.track_ids.push_back(cells[0]);
        ds.paths.push_back(cells[1]);
        std::vector<std::string> tags;
        for (std::size_t i = 2; i < cells.size(); ++i)
            if (!cells[i].empty()) {
                tags.push_back(cells[i]);
                vocab.insert(cells[i]);
            }
        row_tags.push_back(std::move(tags));
    }
    ds.labels.track_ids = ds.track_ids;
    ds.labels.tag_names.assign(vocab.begin(), vocab.end());
    std::map<std::string, std::size_t> tag_index;
    for (std::size_t i = 0; i < ds.labels.tag_names.size(); ++i) tag_index[ds.labels.tag_names[i]] = i;
    ds.labels.indicators = Matrix(ds.track_ids.size(), ds.labels.tag_names.size());
    for (std::size_t r = 0; r < row_tags.size(); ++r)
        for (const auto& t : row_tags[r]) ds.labels.indicators.at(r, tag_index[t]) = 1.0;
    if (ds.track_ids.size() == 18486) ds.note = "full MTG-Jamendo mood/theme set detected";
    return ds;
}

// ---- splits -------------------------------------------------------------------

struct SplitSpec {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
    std::uint64_t seed = 0;
};

namespace detail {

// Largest-remainder rounding of size*fraction to integer counts summing to size.
inline std::vector<std::size_t> allocate(std::size_t size, const std::vector<double>& fractions) {
    std::vector<std::size_t> counts(fractions.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        const double exact = static_cast<double>(size) * fractions[i];
        counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        assigned += counts[i];
        remainders.push_back({exact - std::floor(exact + 1e-9), i});
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; assigned < size; ++i, ++assigned) counts[remainders[i % remainders.size()].second]++;
    return counts;
}

}  // namespace detail

// Deterministic 3-way split: stratified per class for multiclass labels,
// greedy rarest-tag-first balancing for multilabel.
inline SplitSpec split(const LabelMatrix& labels, const std::vector<double>& fractions,
                       std::uint64_t seed) {
    if (fractions.size() != 3) throw Error("expected 3 split fractions");
    double total = 0.0;
    for (double f : fractions) {
        if (f < 0.0) throw Error("split fractions must be non-negative");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error("split fractions must sum to 1");

    const std::size_t n = labels.track_ids.size();
    std::size_t parts = 0;
    for (double f : fractions)
        if (f > 0.0) ++parts;

    SplitSpec spec;
    spec.seed = seed;
    std::array<std::vector<std::string>*, 3> out = {&spec.train, &spec.validation, &spec.test};
    Rng rng(seed);

    if (labels.task_kind == TaskKind::Multiclass) {
        for (std::size_t c = 0; c < labels.tag_names.size(); ++c) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i)
                if (labels.indicators.at(i, c) == 1.0) members.push_back(i);
            if (members.empty()) continue;
            if (members.size() < parts)
                throw ClassTooSmall("class '" + labels.tag_names[c] + "' has " +
                                    std::to_string(members.size()) + " members for " +
                                    std::to_string(parts) + " split parts");
            rng.shuffle(members);
            const auto counts = detail::allocate(members.size(), fractions);
            std::size_t pos = 0;
            for (std::size_t s = 0; s < 3; ++s)
                for (std::size_t k = 0; k < counts[s]; ++k)
                    out[s]->push_back(labels.track_ids[members[pos++]]);
        }
    } else {
        // iterative stratification: place samples of the rarest tag first,
        // always into the split with the greatest remaining demand for it
        const std::size_t n_tags = labels.tag_names.size();
        std::vector<std::size_t> tag_count(n_tags, 0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t t = 0; t < n_tags; ++t)
                if (labels.indicators.at(i, t) == 1.0) ++tag_count[t];

        std::vector<std::vector<double>> desired(3, std::vector<double>(n_tags));
        std::vector<double> capacity(3);
        for (std::size_t s = 0; s < 3; ++s) {
            capacity[s] = fractions[s] * static_cast<double>(n);
            for (std::size_t t = 0; t < n_tags; ++t)
                desired[s][t] = fractions[s] * static_cast<double>(tag_count[t]);
        }

        std::vector<int> assignment(n, -1);
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        rng.shuffle(order);

        std::vector<std::size_t> tags_by_rarity;
        for (std::size_t t = 0; t < n_tags; ++t)
            if (tag_count[t] > 0) tags_by_rarity.push_back(t);
        std::sort(tags_by_rarity.begin(), tags_by_rarity.end(), [&](std::size_t a, std::size_t b) {
            if (tag_count[a] != tag_count[b]) return tag_count[a] < tag_count[b];
            return a < b;
        });

        auto place = [&](std::size_t i, std::size_t s) {
            assignment[i] = static_cast<int>(s);
            capacity[s] -= 1.0;
            for (std::size_t t = 0; t < n_tags; ++t)
                if (labels.indicators.at(i, t) == 1.0) desired[s][t] -= 1.0;
        };

        for (std::size_t t : tags_by_rarity) {
            for (std::size_t i : order) {
                if (assignment[i] != -1 || labels.indicators.at(i, t) != 1.0) continue;
                std::size_t best = 0;
                for (std::size_t s = 1; s < 3; ++s) {
                    if (desired[s][t] > desired[best][t] ||
                        (desired[s][t] == desired[best][t] && capacity[s] > capacity[best]))
                        best = s;
                }
                place(i, best);
            }
        }
        for (std::size_t i : order) {
            if (assignment[i] != -1) continue;
            std::size_t best = 0;
            for (std::size_t s = 1; s < 3; ++s)
                if (capacity[s] > capacity[best]) best = s;
            place(i, best);
        }
        for (std::size_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(assignment[i])]->push_back(labels.track_ids[i]);
    }
    for (auto* part : out) std::sort(part->begin(), part->end());
    return spec;
}

// ---- feature store ------------------------------------------------------------

struct StoreConfig {
    int sample_rate = audio::kCanonicalRate;
    int frame_size = signal::kFrameSize;
    int hop = signal::kHop;
    int mfcc_coeffs = signal::kMfccCoeffs;
    double mfcc_window_s = signal::kMfccWindowSeconds;
};

inline std::string config_hash(const StoreConfig& c) {
    std::ostringstream os;
    os << c.sample_rate << "|" << c.frame_size << "|" << c.hop << "|" << c.mfcc_coeffs << "|"
       << c.mfcc_window_s;
    return hex64(fnv1a64(os.str()));
}

inline std::string manifest_path_for(const std::string& csv_path) {
    return csv_path + ".manifest.json";
}

// CSV store plus sidecar JSON manifest. Rows are sorted by track_id so
// byte-identical output never depends on extraction order.
inline void write_store(const std::string& csv_path, std::vector<FeatureVector> rows,
                        const StoreConfig& config = StoreConfig{}) {
    const auto& names = canonical_feature_names();
    std::sort(rows.begin(), rows.end(),
              [](const FeatureVector& a, const FeatureVector& b) { return a.track_id < b.track_id; });

    std::ofstream out(csv_path);
    if (!out) throw Error("cannot write store: " + csv_path);
    out << "track_id";
    for (const auto& nme : names) out << "," << nme;
    out << "\n";
    for (const auto& r : rows) {
        if (r.values.size() != names.size())
            throw DimensionMismatch("feature vector for '" + r.track_id + "' has wrong dimension");
        if (r.track_id.find_first_of(",\n\r") != std::string::npos)
            throw Error("track id contains CSV separators: " + r.track_id);
        out << r.track_id;
        for (double v : r.values) out << "," << format_double(v);
        out << "\n";
    }
    out.close();

    nlohmann::json manifest;
    manifest["feature_names"] = names;
    nlohmann::json groups;
    for (std::size_t i = 0; i < names.size(); ++i) groups[names[i]] = feature_groups()[i];
    manifest["groups"] = groups;
    nlohmann::json cfg;
    cfg["sample_rate"] = config.sample_rate;
    cfg["frame_size"] = config.frame_size;
    cfg["hop"] = config.hop;
    cfg["mfcc_coeffs"] = config.mfcc_coeffs;
    cfg["mfcc_window_s"] = config.mfcc_window_s;
    manifest["config"] = cfg;
    manifest["config_hash"] = config_hash(config);
    if (!rows.empty()) {
        StandardScaler stats = fit_scaler(rows);
        manifest["scaler_stats"] = {{"mean", stats.mean}, {"std", stats.std_dev}};
    }
    std::ofstream mout(manifest_path_for(csv_path));
    if (!mout) throw Error("cannot write manifest for: " + csv_path);
    mout << manifest.dump(2) << "\n";
}

inline std::vector<FeatureVector> read_store(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw Error("cannot open store: " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw Error("empty store: " + csv_path);

    const auto& names = canonical_feature_names();
    {
        std::ostringstream expect;
        expect << "track_id";
        for (const auto& nme : names) expect << "," << nme;
        if (line != expect.str()) throw Error("store header does not match canonical features");
    }

    std::vector<FeatureVector> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        FeatureVector v;
        std::size_t pos = 0, col = 0;
        while (true) {
            const std::size_t next = line.find(',', pos);
            const std::string cell =
                next == std::string::npos ? line.substr(pos) : line.substr(pos, next - pos);
            if (col == 0) {
                v.track_id = cell;
            } else {
                double d = 0.0;
                auto res = std::from_chars(cell.data(), cell.data() + cell.size(), d);
                if (res.ec != std::errc())
                    throw MalformedRow(csv_path + ": bad number '" + cell + "'", line_no);
                v.values.push_back(d);
            }
            ++col;
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        if (v.values.size() != names.size())
            throw MalformedRow(csv_path + ": wrong column count", line_no);
        rows.push_back(std::move(v));
    }
    return rows;
}

// ---- chords manifest -----------------------------------------------------------

struct ChordsEntry {
    std::string lab_path;  // empty = no chords for this track
    std::optional<harmony::KeyEstimate> key_override;
    std::optional<double> vocal_flag;
};

// TSV: track_id, lab path, optional key (e.g. "C:maj"), optional vocal flag
// in {0, 0.5, 1}. "-" marks an absent value.
inline std::map<std::string, ChordsEntry> load_chords_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open chords manifest: " + path);
    std::map<std::string, ChordsEntry> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = detail::split_tsv(line);
        if (cells.size() < 2 || cells[0].empty())
            throw MalformedRow(path + ": expected 'id<TAB>lab_path[<TAB>key][<TAB>vocal]'", line_no);
        ChordsEntry e;
        if (cells[1] != "-") e.lab_path = cells[1];
        if (cells.size() >= 3 && !cells[2].empty() && cells[2] != "-")
            e.key_override = harmony::parse_key_label(cells[2]);
        if (cells.size() >= 4 && !cells[3].empty() && cells[3] != "-") {
            const double v = std::stod(cells[3]);
            if (v != 0.0 && v != 0.5 && v != 1.0)
                throw MalformedRow(path + ": vocal flag must be 0, 0.5 or 1", line_no);
            e.vocal_flag = v;
        }
        out[cells[0]] = std::move(e);
    }
    return out;
}

}  // namespace tagscope::tabular
