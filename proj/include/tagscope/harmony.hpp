#pragma once

#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tagscope/common.hpp"
#include "tagscope/harmony_types.hpp"

namespace tagscope::harmony {

// 32-dim harmonic feature block: two function ratios plus 30 n-gram ratios.
struct HarmonicFeatures {
    static constexpr int kDim = 32;
    static constexpr int kNgramDim = 30;

    double dominants_ratio = 0.0;
    double subdominants_ratio = 0.0;
    std::array<double, kNgramDim> ngram_ratios{};

    static const std::vector<std::string>& names();

    std::array<double, kDim> values() const {
        std::array<double, kDim> v{};
        v[0] = dominants_ratio;
        v[1] = subdominants_ratio;
        for (int i = 0; i < kNgramDim; ++i) v[static_cast<std::size_t>(i + 2)] = ngram_ratios[static_cast<std::size_t>(i)];
        return v;
    }
};

namespace detail {

// n-gram alphabet; glob events count as dominants here.
enum NgramSym { kTon = 0, kDom = 1, kSub = 2 };

inline const char* sym_name(int s) {
    static const char* names[3] = {"ton", "dom", "sub"};
    return names[s];
}

// Trigrams over {ton, dom, sub} excluding the three repeated-symbol ones and
// the three beginning sub-ton (unreachable: a tonic only ever follows a
// dominant or opens the sequence). 21 entries.
inline const std::vector<std::array<int, 3>>& trigram_vocab() {
    static const std::vector<std::array<int, 3>> vocab = [] {
        std::vector<std::array<int, 3>> v;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int c = 0; c < 3; ++c) {
                    if (a == b && b == c) continue;
                    if (a == kSub && b == kTon) continue;
                    v.push_back({a, b, c});
                }
        return v;
    }();
    return vocab;
}

}  // namespace detail

inline const std::vector<std::string>& HarmonicFeatures::names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        n.emplace_back("dominants_ratio");
        n.emplace_back("subdominants_ratio");
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                n.push_back(std::string("bigram_") + detail::sym_name(a) + "_" + detail::sym_name(b));
        for (const auto& t : detail::trigram_vocab())
            n.push_back(std::string("trigram_") + detail::sym_name(t[0]) + "_" +
                        detail::sym_name(t[1]) + "_" + detail::sym_name(t[2]));
        return n;
    }();
    return names;
}

// ---- chord label grammar --------------------------------------------------

namespace detail {

inline int note_pitch_class(char c) {
    switch (c) {
        case 'C': return 0;
        case 'D': return 2;
        case 'E': return 4;
        case 'F': return 5;
        case 'G': return 7;
        case 'A': return 9;
        case 'B': return 11;
        default: return -1;
    }
}

struct QualityToken {
    const char* token;
    ChordQuality quality;
};

// Known quality tokens of the "Root:quality" .lab convention. Tokens beyond
// the nine modeled qualities map to Other.
inline const std::vector<QualityToken>& quality_tokens() {
    static const std::vector<QualityToken> t = {
        {"maj", ChordQuality::Maj},     {"min", ChordQuality::Min},
        {"dim", ChordQuality::Dim},     {"aug", ChordQuality::Aug},
        {"maj7", ChordQuality::Maj7},   {"min7", ChordQuality::Min7},
        {"7", ChordQuality::Dom7},      {"dom7", ChordQuality::Dom7},
        {"sus2", ChordQuality::Sus2},   {"sus4", ChordQuality::Sus4},
        {"dim7", ChordQuality::Other},  {"hdim", ChordQuality::Other},
        {"hdim7", ChordQuality::Other}, {"maj6", ChordQuality::Other},
        {"min6", ChordQuality::Other},  {"6", ChordQuality::Other},
        {"9", ChordQuality::Other},     {"maj9", ChordQuality::Other},
        {"min9", ChordQuality::Other},  {"11", ChordQuality::Other},
        {"min11", ChordQuality::Other}, {"13", ChordQuality::Other},
        {"maj13", ChordQuality::Other}, {"min13", ChordQuality::Other},
        {"5", ChordQuality::Other},     {"1", ChordQuality::Other},
        {"sus", ChordQuality::Other},   {"aug7", ChordQuality::Other},
        {"minmaj7", ChordQuality::Other}};
    return t;
}

}  // namespace detail

// Parse a chord label such as "C:maj", "F#:7", "Bb" or "N". A trailing
// "/bass" or "(extensions)" part is accepted and ignored.
inline ChordEvent parse_chord_label(std::string_view label) {
    if (label.empty()) throw ParseError("empty chord label", 0);
    ChordEvent ev;
    ev.raw_label = std::string(label);

    if (label == "N" || label == "X") {
        ev.root = -1;
        ev.quality = ChordQuality::Other;
        return ev;
    }

    const int base = detail::note_pitch_class(label[0]);
    if (base < 0) throw ParseError("unknown note name", 0);
    std::size_t pos = 1;
    int root = base;
    while (pos < label.size() && (label[pos] == '#' || label[pos] == 'b')) {
        root += label[pos] == '#' ? 1 : -1;
        ++pos;
    }
    ev.root = ((root % 12) + 12) % 12;

    if (pos == label.size()) {
        ev.quality = ChordQuality::Maj;  // bare note name
        return ev;
    }
    if (label[pos] != ':') throw ParseError("expected ':' after note name", pos);
    ++pos;
    const std::size_t quality_start = pos;

    // strip inversion and parenthesized extensions
    std::string quality;
    while (pos < label.size() && label[pos] != '/' && label[pos] != '(') {
        quality += label[pos];
        ++pos;
    }
    if (quality.empty()) throw ParseError("missing quality token", quality_start);
    for (const auto& t : detail::quality_tokens()) {
        if (quality == t.token) {
            ev.quality = t.quality;
            return ev;
        }
    }
    throw ParseError("unknown quality token '" + quality + "'", quality_start);
}

// Three-column .lab chord annotations: start end label.
inline std::vector<ChordEvent> parse_lab(std::istream& in, const std::string& origin = "<lab>") {
    std::vector<ChordEvent> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        double start = 0.0, end = 0.0;
        std::string label;
        if (!(row >> start >> end >> label))
            throw MalformedRow(origin + ": expected 'start end label'", line_no);
        if (!(start < end))
            throw MalformedRow(origin + ": start must precede end", line_no);
        ChordEvent ev = parse_chord_label(label);
        ev.start = start;
        ev.end = end;
        events.push_back(std::move(ev));
    }
    return events;
}

inline std::vector<ChordEvent> load_lab(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open chord file: " + path);
    return parse_lab(in, path);
}

// ---- key estimation ---------------------------------------------------------

namespace detail {

// Expected chord quality sets per scale degree (semitones above tonic).
// Score 1 for a diatonic root with a fitting quality, 0.5 for a diatonic
// root with a foreign quality. Tonic-degree chords weigh 1.1x, which keeps
// the argmax unique between relative major/minor pairs and so makes the
// estimate transposition-covariant.
inline double degree_score(int degree, ChordQuality q, bool major) {
    auto fits = [&](std::initializer_list<ChordQuality> set) {
        const double bonus = degree == 0 ? 1.1 : 1.0;
        for (ChordQuality s : set)
            if (q == s) return bonus;
        return 0.5 * bonus;
    };
    if (major) {
        switch (degree) {
            case 0: return fits({ChordQuality::Maj, ChordQuality::Maj7});
            case 2: return fits({ChordQuality::Min, ChordQuality::Min7});
            case 4: return fits({ChordQuality::Min, ChordQuality::Min7});
            case 5: return fits({ChordQuality::Maj, ChordQuality::Maj7});
            case 7: return fits({ChordQuality::Maj, ChordQuality::Dom7});
            case 9: return fits({ChordQuality::Min, ChordQuality::Min7});
            case 11: return fits({ChordQuality::Dim});
            default: return 0.0;
        }
    }
    switch (degree) {
        case 0: return fits({ChordQuality::Min, ChordQuality::Min7});
        case 2: return fits({ChordQuality::Dim});
        case 3: return fits({ChordQuality::Maj, ChordQuality::Maj7});
        case 5: return fits({ChordQuality::Min, ChordQuality::Min7});
        case 7: return fits({ChordQuality::Min, ChordQuality::Min7, ChordQuality::Maj, ChordQuality::Dom7});
        case 8: return fits({ChordQuality::Maj, ChordQuality::Maj7});
        case 10: return fits({ChordQuality::Maj, ChordQuality::Dom7});
        default: return 0.0;
    }
}

}  // namespace detail

// Duration-weighted diatonic template match over all 24 keys. Ties go to the
// lower tonic pitch class, major before minor.
inline KeyEstimate estimate_key(const std::vector<ChordEvent>& chords) {
    double total_duration = 0.0;
    for (const auto& c : chords)
        if (c.pitched()) total_duration += c.duration();
    if (total_duration <= 0.0) throw NoPitchedChords("no pitched chords to estimate a key from");

    KeyEstimate best;
    double best_score = -1.0;
    for (int tonic = 0; tonic < 12; ++tonic) {
        for (int mode = 0; mode < 2; ++mode) {
            const bool major = mode == 0;
            double score = 0.0;
            for (const auto& c : chords) {
                if (!c.pitched()) continue;
                const int degree = ((c.root - tonic) % 12 + 12) % 12;
                score += c.duration() * detail::degree_score(degree, c.quality, major);
            }
            if (score > best_score) {
                best_score = score;
                best.tonic = tonic;
                best.mode = major ? KeyEstimate::Mode::Major : KeyEstimate::Mode::Minor;
            }
        }
    }
    best.confidence = best_score / total_duration;
    return best;
}

// Parse a key override such as "C:maj" / "A:min".
inline KeyEstimate parse_key_label(std::string_view label) {
    const ChordEvent ev = parse_chord_label(label);
    if (!ev.pitched()) throw ParseError("key must name a pitch class", 0);
    KeyEstimate key;
    key.tonic = ev.root;
    key.mode = (ev.quality == ChordQuality::Min || ev.quality == ChordQuality::Min7)
                   ? KeyEstimate::Mode::Minor
                   : KeyEstimate::Mode::Major;
    key.confidence = 1.0;
    return key;
}

// ---- functional labeling ----------------------------------------------------

namespace detail {

inline bool is_dominant_degree(int degree) { return degree == 7 || degree == 11; }
inline bool is_subdominant_degree(int degree) { return degree == 5 || degree == 2; }

}  // namespace detail

// Collapse consecutive identical (root, quality) chords and drop no-chords.
inline std::vector<ChordEvent> collapse_events(const std::vector<ChordEvent>& chords) {
    std::vector<ChordEvent> out;
    for (const auto& c : chords) {
        if (!c.pitched()) continue;
        if (!out.empty() && out.back().root == c.root && out.back().quality == c.quality) {
            out.back().end = c.end;
            continue;
        }
        out.push_back(c);
    }
    return out;
}

// One harmonic function per collapsed pitched chord event.
//   dominant: root on degree V or vii; glob when additionally maj/dom7
//   subdominant: root on degree IV or ii
//   tonic: directly after a dominant with a non-functional root, or an
//          opening chord on the tonic degree
inline std::vector<HarmonicFunction> functional_labels(const std::vector<ChordEvent>& chords,
                                                       const KeyEstimate& key) {
    const std::vector<ChordEvent> events = collapse_events(chords);
    std::vector<HarmonicFunction> out;
    out.reserve(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        const int degree = ((events[i].root - key.tonic) % 12 + 12) % 12;
        HarmonicFunction fn = HarmonicFunction::Other;
        if (detail::is_dominant_degree(degree)) {
            const bool glob =
                events[i].quality == ChordQuality::Maj || events[i].quality == ChordQuality::Dom7;
            fn = glob ? HarmonicFunction::Glob : HarmonicFunction::Dom;
        } else if (detail::is_subdominant_degree(degree)) {
            fn = HarmonicFunction::Sub;
        } else if (i > 0 && (out[i - 1] == HarmonicFunction::Dom || out[i - 1] == HarmonicFunction::Glob)) {
            fn = HarmonicFunction::Ton;
        } else if (i == 0 && degree == 0) {
            fn = HarmonicFunction::Ton;
        }
        out.push_back(fn);
    }
    return out;
}

// Ratio features over a function sequence. The n-gram stream drops Other
// events and counts globs as dominants; dominants_ratio counts Dom + Glob.
inline HarmonicFeatures harmonic_features(const std::vector<HarmonicFunction>& functions) {
    HarmonicFeatures f;
    if (functions.empty()) return f;

    const double n = static_cast<double>(functions.size());
    std::size_t dom = 0, sub = 0;
    std::vector<int> stream;
    stream.reserve(functions.size());
    for (HarmonicFunction fn : functions) {
        switch (fn) {
            case HarmonicFunction::Dom:
            case HarmonicFunction::Glob:
                ++dom;
                stream.push_back(detail::kDom);
                break;
            case HarmonicFunction::Sub:
                ++sub;
                stream.push_back(detail::kSub);
                break;
            case HarmonicFunction::Ton:
                stream.push_back(detail::kTon);
                break;
            case HarmonicFunction::Other:
                break;
        }
    }
    f.dominants_ratio = static_cast<double>(dom) / n;
    f.subdominants_ratio = static_cast<double>(sub) / n;

    std::array<std::size_t, HarmonicFeatures::kNgramDim> counts{};
    if (stream.size() >= 2) {
        for (std::size_t i = 0; i + 1 < stream.size(); ++i)
            ++counts[static_cast<std::size_t>(stream[i] * 3 + stream[i + 1])];
        const double total = static_cast<double>(stream.size() - 1);
        for (std::size_t s = 0; s < 9; ++s)
            f.ngram_ratios[s] = static_cast<double>(counts[s]) / total;
    }
    if (stream.size() >= 3) {
        const auto& vocab = detail::trigram_vocab();
        for (std::size_t i = 0; i + 2 < stream.size(); ++i) {
            for (std::size_t v = 0; v < vocab.size(); ++v) {
                if (vocab[v][0] == stream[i] && vocab[v][1] == stream[i + 1] &&
                    vocab[v][2] == stream[i + 2]) {
                    ++counts[9 + v];
                    break;
                }
            }
        }
        const double total = static_cast<double>(stream.size() - 2);
        for (std::size_t v = 0; v < vocab.size(); ++v)
            f.ngram_ratios[9 + v] = static_cast<double>(counts[9 + v]) / total;
    }
    return f;
}

// End-to-end: chords -> key -> functions -> 32-dim block. Empty input gives
// the all-zero vector.
inline HarmonicFeatures harmonic_features_for(const std::vector<ChordEvent>& chords,
                                              const KeyEstimate* key_override = nullptr) {
    bool any_pitched = false;
    for (const auto& c : chords)
        if (c.pitched()) any_pitched = true;
    if (!any_pitched) return HarmonicFeatures{};
    const KeyEstimate key = key_override != nullptr ? *key_override : estimate_key(chords);
    return harmonic_features(functional_labels(chords, key));
}

}  // namespace tagscope::harmony
