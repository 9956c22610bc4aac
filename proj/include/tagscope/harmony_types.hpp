#pragma once

#include <string>

namespace tagscope::harmony {

enum class ChordQuality { Maj, Min, Dim, Aug, Maj7, Min7, Dom7, Sus2, Sus4, Other };

// Timed chord symbol; root is a pitch class 0-11, or -1 for the no-chord
// symbol "N".
struct ChordEvent {
    double start = 0.0;
    double end = 0.0;
    int root = -1;
    ChordQuality quality = ChordQuality::Other;
    std::string raw_label;

    bool pitched() const { return root >= 0; }
    double duration() const { return end - start; }
};

enum class HarmonicFunction { Ton, Dom, Sub, Glob, Other };

struct KeyEstimate {
    enum class Mode { Major, Minor };
    int tonic = 0;  // pitch class 0-11
    Mode mode = Mode::Major;
    double confidence = 0.0;
};

}  // namespace tagscope::harmony
