#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <sstream>

#include "tagscope/harmony.hpp"
#include "tagscope/rng.hpp"

using namespace tagscope;
using harmony::ChordEvent;
using harmony::ChordQuality;
using harmony::HarmonicFunction;
using harmony::KeyEstimate;

namespace {

std::vector<ChordEvent> sequence(std::initializer_list<const char*> labels, double step = 1.0) {
    std::vector<ChordEvent> out;
    double t = 0.0;
    for (const char* l : labels) {
        ChordEvent ev = harmony::parse_chord_label(l);
        ev.start = t;
        ev.end = t + step;
        t += step;
        out.push_back(ev);
    }
    return out;
}

std::vector<ChordEvent> cfg7c() { return sequence({"C:maj", "F:maj", "G:7", "C:maj"}); }

// independent 24-key scorer mirroring the documented template
double oracle_key_score(const std::vector<ChordEvent>& chords, int tonic, bool major) {
    auto diatonic = [&](int degree) {
        static const int maj[7] = {0, 2, 4, 5, 7, 9, 11};
        static const int min[7] = {0, 2, 3, 5, 7, 8, 10};
        const int* scale = major ? maj : min;
        for (int i = 0; i < 7; ++i)
            if (scale[i] == degree) return true;
        return false;
    };
    auto fits = [&](int degree, ChordQuality q) {
        if (major) {
            switch (degree) {
                case 0: case 5: return q == ChordQuality::Maj || q == ChordQuality::Maj7;
                case 7: return q == ChordQuality::Maj || q == ChordQuality::Dom7;
                case 2: case 4: case 9: return q == ChordQuality::Min || q == ChordQuality::Min7;
                case 11: return q == ChordQuality::Dim;
                default: return false;
            }
        }
        switch (degree) {
            case 0: case 5: return q == ChordQuality::Min || q == ChordQuality::Min7;
            case 3: case 8: return q == ChordQuality::Maj || q == ChordQuality::Maj7;
            case 7:
                return q == ChordQuality::Min || q == ChordQuality::Min7 ||
                       q == ChordQuality::Maj || q == ChordQuality::Dom7;
            case 10: return q == ChordQuality::Maj || q == ChordQuality::Dom7;
            case 2: return q == ChordQuality::Dim;
            default: return false;
        }
    };
    double score = 0.0;
    for (const auto& c : chords) {
        if (!c.pitched()) continue;
        const int degree = ((c.root - tonic) % 12 + 12) % 12;
        if (!diatonic(degree)) continue;
        score += c.duration() * (fits(degree, c.quality) ? 1.0 : 0.5);
    }
    return score;
}

}  // namespace

// ---- chord label grammar -----------------------------------------------------

TEST_CASE("parse: grammar basics") {
    auto c = harmony::parse_chord_label("C:maj");
    REQUIRE(c.root == 0);
    REQUIRE(c.quality == ChordQuality::Maj);

    auto g7 = harmony::parse_chord_label("G:7");
    REQUIRE(g7.root == 7);
    REQUIRE(g7.quality == ChordQuality::Dom7);

    auto n = harmony::parse_chord_label("N");
    REQUIRE_FALSE(n.pitched());

    auto bare = harmony::parse_chord_label("Eb");
    REQUIRE(bare.root == 3);
    REQUIRE(bare.quality == ChordQuality::Maj);

    auto fsm = harmony::parse_chord_label("F#:min7");
    REQUIRE(fsm.root == 6);
    REQUIRE(fsm.quality == ChordQuality::Min7);

    auto inv = harmony::parse_chord_label("C:maj/5");
    REQUIRE(inv.root == 0);
    REQUIRE(inv.quality == ChordQuality::Maj);
}

TEST_CASE("parse: errors carry byte offsets") {
    try {
        harmony::parse_chord_label("H:maj");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(e.offset == 0);
    }
    try {
        harmony::parse_chord_label("C:zzz");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(e.offset == 2);
    }
    REQUIRE_THROWS_AS(harmony::parse_chord_label("C:"), ParseError);
    REQUIRE_THROWS_AS(harmony::parse_chord_label(""), ParseError);
}

TEST_CASE("parse: lab files") {
    std::istringstream in("0.0 1.5 C:maj\n1.5 2.0 N\n# comment\n2.0 3.0 G:7\n");
    const auto events = harmony::parse_lab(in);
    REQUIRE(events.size() == 3);
    REQUIRE(events[0].root == 0);
    REQUIRE_FALSE(events[1].pitched());
    REQUIRE(events[2].quality == ChordQuality::Dom7);

    std::istringstream bad("1.0 0.5 C:maj\n");
    REQUIRE_THROWS_AS(harmony::parse_lab(bad), MalformedRow);
    std::istringstream short_row("0.0 1.0\n");
    REQUIRE_THROWS_AS(harmony::parse_lab(short_row), MalformedRow);
}

// ---- key estimation -------------------------------------------------------------

TEST_CASE("estimate_key: single repeated chord resolves to its own major key") {
    const auto key = harmony::estimate_key(sequence({"C:maj", "C:maj", "C:maj"}));
    REQUIRE(key.tonic == 0);
    REQUIRE(key.mode == KeyEstimate::Mode::Major);
}

TEST_CASE("estimate_key: C-F-G7-C agrees with the 24-key oracle") {
    const auto chords = cfg7c();
    const auto key = harmony::estimate_key(chords);

    int best_tonic = -1;
    bool best_major = true;
    double best = -1.0;
    for (int tonic = 0; tonic < 12; ++tonic)
        for (int mode = 0; mode < 2; ++mode) {
            const double s = oracle_key_score(chords, tonic, mode == 0);
            if (s > best) {
                best = s;
                best_tonic = tonic;
                best_major = mode == 0;
            }
        }
    REQUIRE(key.tonic == best_tonic);
    REQUIRE((key.mode == KeyEstimate::Mode::Major) == best_major);
    REQUIRE(key.tonic == 0);
    REQUIRE(key.mode == KeyEstimate::Mode::Major);
}

TEST_CASE("estimate_key: empty and all-N sequences are rejected") {
    REQUIRE_THROWS_AS(harmony::estimate_key({}), NoPitchedChords);
    REQUIRE_THROWS_AS(harmony::estimate_key(sequence({"N", "N"})), NoPitchedChords);
}

// ---- functional labels -------------------------------------------------------------

TEST_CASE("functional_labels: rule table in C major") {
    KeyEstimate c_major{0, KeyEstimate::Mode::Major, 1.0};

    auto fns = harmony::functional_labels(sequence({"G:7"}), c_major);
    REQUIRE(fns == std::vector<HarmonicFunction>{HarmonicFunction::Glob});

    fns = harmony::functional_labels(sequence({"F:maj"}), c_major);
    REQUIRE(fns == std::vector<HarmonicFunction>{HarmonicFunction::Sub});

    // a chord following a dominant without another function is a tonic
    fns = harmony::functional_labels(sequence({"G:7", "C:maj"}), c_major);
    REQUIRE(fns[1] == HarmonicFunction::Ton);

    // mediant with no preceding dominant
    fns = harmony::functional_labels(sequence({"E:min"}), c_major);
    REQUIRE(fns == std::vector<HarmonicFunction>{HarmonicFunction::Other});

    // minor dominant is DOM but not GLOB
    fns = harmony::functional_labels(sequence({"G:min"}), c_major);
    REQUIRE(fns == std::vector<HarmonicFunction>{HarmonicFunction::Dom});

    // consecutive identical chords collapse to one functional event
    fns = harmony::functional_labels(sequence({"C:maj", "C:maj", "F:maj"}), c_major);
    REQUIRE(fns.size() == 2);
    REQUIRE(fns[0] == HarmonicFunction::Ton);
    REQUIRE(fns[1] == HarmonicFunction::Sub);
}

TEST_CASE("functional_labels: full fixture gives TON SUB GLOB TON") {
    const auto key = harmony::estimate_key(cfg7c());
    const auto fns = harmony::functional_labels(cfg7c(), key);
    const std::vector<HarmonicFunction> expected = {HarmonicFunction::Ton, HarmonicFunction::Sub,
                                                    HarmonicFunction::Glob, HarmonicFunction::Ton};
    REQUIRE(fns == expected);
}

// ---- harmonic features ----------------------------------------------------------------

TEST_CASE("harmonic_features: fixture ratios from the worked example") {
    const auto key = harmony::estimate_key(cfg7c());
    const auto f = harmony::harmonic_features(harmony::functional_labels(cfg7c(), key));
    REQUIRE(f.dominants_ratio == 0.25);
    REQUIRE(f.subdominants_ratio == 0.25);

    const auto& names = harmony::HarmonicFeatures::names();
    const auto vals = f.values();
    auto value_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return vals[i];
        FAIL("missing feature " + name);
        return 0.0;
    };
    REQUIRE(value_of("bigram_sub_dom") == Catch::Approx(1.0 / 3.0));
    REQUIRE(value_of("trigram_sub_dom_ton") == Catch::Approx(0.5));
}

TEST_CASE("harmonic_features: empty input gives the all-zero 32-vector") {
    const auto f = harmony::harmonic_features({});
    for (double v : f.values()) REQUIRE(v == 0.0);
    REQUIRE(harmony::HarmonicFeatures::names().size() == 32);
    REQUIRE(f.values().size() == 32);
}

TEST_CASE("harmonic_features: ratios live in [0,1] and families sum to at most 1") {
    Rng rng(17);
    const char* qualities[] = {"maj", "min", "7", "min7", "dim", "sus4"};
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<ChordEvent> chords;
        double t = 0.0;
        const int n = 2 + static_cast<int>(rng.next_below(20));
        for (int i = 0; i < n; ++i) {
            const int pc = static_cast<int>(rng.next_below(12));
            static const char* pcs[] = {"C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};
            std::string label = std::string(pcs[pc]) + ":" + qualities[rng.next_below(6)];
            ChordEvent ev = harmony::parse_chord_label(label);
            ev.start = t;
            ev.end = t + 0.5 + rng.next_unit();
            t = ev.end;
            chords.push_back(ev);
        }
        const auto key = harmony::estimate_key(chords);
        const auto f = harmony::harmonic_features(harmony::functional_labels(chords, key));
        REQUIRE(f.dominants_ratio + f.subdominants_ratio <= 1.0 + 1e-12);
        double bigram_sum = 0.0, trigram_sum = 0.0;
        const auto vals = f.values();
        for (double v : vals) {
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
        }
        for (std::size_t i = 2; i < 11; ++i) bigram_sum += vals[i];
        for (std::size_t i = 11; i < 32; ++i) trigram_sum += vals[i];
        REQUIRE(bigram_sum <= 1.0 + 1e-12);
        REQUIRE(trigram_sum <= 1.0 + 1e-12);
    }
}

TEST_CASE("harmonic_features: transposition leaves the vector bit-identical") {
    Rng rng(23);
    static const char* pcs[] = {"C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};
    const char* qualities[] = {"maj", "min", "7", "maj7", "min7"};
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<ChordEvent> chords;
        double t = 0.0;
        for (int i = 0; i < 12; ++i) {
            std::string label =
                std::string(pcs[rng.next_below(12)]) + ":" + qualities[rng.next_below(5)];
            ChordEvent ev = harmony::parse_chord_label(label);
            ev.start = t;
            ev.end = t + 1.0;
            t = ev.end;
            chords.push_back(ev);
        }
        KeyEstimate key{static_cast<int>(rng.next_below(12)),
                        rng.next_unit() < 0.5 ? KeyEstimate::Mode::Major : KeyEstimate::Mode::Minor,
                        1.0};
        const auto base = harmony::harmonic_features(harmony::functional_labels(chords, key)).values();

        for (int shift = 0; shift < 12; ++shift) {
            auto moved = chords;
            for (auto& c : moved) c.root = (c.root + shift) % 12;
            KeyEstimate moved_key = key;
            moved_key.tonic = (key.tonic + shift) % 12;
            const auto got =
                harmony::harmonic_features(harmony::functional_labels(moved, moved_key)).values();
            REQUIRE(std::memcmp(base.data(), got.data(), sizeof(double) * base.size()) == 0);
        }
    }
}

TEST_CASE("harmonic_features: repeating a sequence moves n-gram ratios only O(1/N)") {
    Rng rng(31);
    std::vector<HarmonicFunction> fns;
    const HarmonicFunction pool[4] = {HarmonicFunction::Ton, HarmonicFunction::Dom,
                                      HarmonicFunction::Sub, HarmonicFunction::Glob};
    for (int i = 0; i < 16; ++i) fns.push_back(pool[rng.next_below(4)]);
    const auto once = harmony::harmonic_features(fns).values();

    std::vector<HarmonicFunction> repeated;
    for (int m = 0; m < 8; ++m) repeated.insert(repeated.end(), fns.begin(), fns.end());
    const auto many = harmony::harmonic_features(repeated).values();

    for (std::size_t i = 2; i < once.size(); ++i)
        REQUIRE(std::abs(once[i] - many[i]) <= 2.5 / static_cast<double>(fns.size() - 1));
}
