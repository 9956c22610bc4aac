#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tagscope {

// Base class for all library errors. Subclasses carry the failure kind in
// the type so callers can catch precisely.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// audio
struct UnsupportedFormat : Error { using Error::Error; };
struct CorruptHeader : Error { using Error::Error; };
struct EmptyAudio : Error { using Error::Error; };

// dsp / features
struct TooShort : Error { using Error::Error; };

// harmony
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t byte_offset)
        : Error(msg + " (offset " + std::to_string(byte_offset) + ")"), offset(byte_offset) {}
    std::size_t offset;
};
struct NoPitchedChords : Error { using Error::Error; };

// tabular
struct EmptyGenreDir : Error { using Error::Error; };
struct DuplicateTrackId : Error { using Error::Error; };
struct MalformedRow : Error {
    MalformedRow(const std::string& msg, std::size_t line_no)
        : Error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
    std::size_t line;
};
struct ClassTooSmall : Error { using Error::Error; };

// gbdt
struct SingleClass : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct EmptyClass : Error { using Error::Error; };

// explain
struct MissingCover : Error { using Error::Error; };

// numerics
struct NumericFailure : Error { using Error::Error; };

// Dense row-major matrix. Small helper shared by the spectrogram, MFCC and
// training code; not a linear algebra type.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    const double* row(std::size_t r) const { return data.data() + r * cols; }
    double* row(std::size_t r) { return data.data() + r * cols; }
};

// Shortest decimal string that round-trips the exact double value.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace tagscope
