#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "tagscope/common.hpp"

namespace tagscope::svg {

struct Entry {
    std::string name;
    double score = 0.0;
};

namespace detail {

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace detail

// Horizontal bar chart, bars sorted by |score| descending, top 20 kept.
// Pure text output: identical input produces identical bytes.
inline std::string bar_chart(std::vector<Entry> entries, const std::string& title) {
    if (entries.empty()) throw Error("bar chart needs at least one entry");
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        const double ma = std::abs(a.score), mb = std::abs(b.score);
        if (ma != mb) return ma > mb;
        return a.name < b.name;
    });
    if (entries.size() > 20) entries.resize(20);

    double max_mag = 0.0;
    for (const auto& e : entries) max_mag = std::max(max_mag, std::abs(e.score));
    if (max_mag <= 0.0) max_mag = 1.0;

    constexpr int kWidth = 640;
    constexpr int kRow = 24;
    constexpr int kLabelWidth = 230;
    constexpr int kTop = 40;
    const int height = kTop + kRow * static_cast<int>(entries.size()) + 16;
    const int bar_span = kWidth - kLabelWidth - 90;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
        << "\" font-family=\"monospace\" font-size=\"12\">\n";
    out << "<text x=\"12\" y=\"22\" font-size=\"14\">" << detail::escape(title) << "</text>\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const int y = kTop + static_cast<int>(i) * kRow;
        const double frac = std::abs(entries[i].score) / max_mag;
        const int len = std::max(1, static_cast<int>(std::lround(frac * bar_span)));
        const char* fill = entries[i].score < 0.0 ? "#c0504d" : "#4f81bd";
        out << "<text x=\"12\" y=\"" << y + 15 << "\">" << detail::escape(entries[i].name)
            << "</text>\n";
        out << "<rect x=\"" << kLabelWidth << "\" y=\"" << y + 4 << "\" width=\"" << len
            << "\" height=\"16\" fill=\"" << fill << "\"/>\n";
        out << "<text x=\"" << kLabelWidth + len + 6 << "\" y=\"" << y + 15 << "\">"
            << format_double(entries[i].score) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace tagscope::svg
