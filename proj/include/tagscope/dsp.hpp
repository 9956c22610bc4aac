#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "tagscope/audio.hpp"
#include "tagscope/common.hpp"

namespace tagscope::dsp {

constexpr double kPi = 3.14159265358979323846;

// Magnitude spectrogram. Row t covers samples [t*hop, t*hop + frame_size),
// row width is frame_size/2 + 1.
struct Spectrogram {
    Matrix mags;
    int frame_size = 0;
    int hop = 0;
    int sample_rate = 0;
    double bin_hz = 0.0;

    std::size_t frames() const { return mags.rows; }
    std::size_t bins() const { return mags.cols; }
};

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT.
inline void fft(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

}  // namespace detail

inline std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
    return w;
}

// Magnitude spectrum of one windowed frame; `frame` must be power-of-two long.
inline std::vector<double> magnitude_spectrum(const std::vector<double>& frame) {
    const std::size_t n = frame.size();
    if (!detail::is_pow2(n)) throw Error("frame size must be a power of two");
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = {frame[i], 0.0};
    detail::fft(buf);
    std::vector<double> mags(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) mags[k] = std::abs(buf[k]);
    return mags;
}

inline Spectrogram stft(const audio::AudioClip& clip, int frame_size, int hop) {
    const std::size_t n = clip.samples.size();
    const std::size_t fs = static_cast<std::size_t>(frame_size);
    if (n < fs) throw TooShort("clip shorter than one analysis frame");
    if (!detail::is_pow2(fs)) throw Error("frame size must be a power of two");

    const std::size_t n_frames = 1 + (n - fs) / static_cast<std::size_t>(hop);
    const std::size_t n_bins = fs / 2 + 1;
    Spectrogram s;
    s.frame_size = frame_size;
    s.hop = hop;
    s.sample_rate = clip.sample_rate;
    s.bin_hz = static_cast<double>(clip.sample_rate) / frame_size;
    s.mags = Matrix(n_frames, n_bins);

    const std::vector<double> window = hann_window(fs);
    std::vector<std::complex<double>> buf(fs);
    for (std::size_t t = 0; t < n_frames; ++t) {
        const double* x = clip.samples.data() + t * static_cast<std::size_t>(hop);
        for (std::size_t i = 0; i < fs; ++i) buf[i] = {x[i] * window[i], 0.0};
        detail::fft(buf);
        double* row = s.mags.row(t);
        for (std::size_t k = 0; k < n_bins; ++k) row[k] = std::abs(buf[k]);
    }
    return s;
}

// ---- per-frame descriptors ----------------------------------------------
// All return 0 for an all-zero frame (zero-spectrum convention).

namespace frames {

inline double centroid(const double* m, std::size_t k, double bin_hz) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        num += static_cast<double>(i) * bin_hz * m[i];
        den += m[i];
    }
    return den > 0.0 ? num / den : 0.0;
}

inline double spread(const double* m, std::size_t k, double bin_hz) {
    const double c = centroid(m, k, bin_hz);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double d = static_cast<double>(i) * bin_hz - c;
        num += m[i] * d * d;
        den += m[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

inline double rolloff(const double* m, std::size_t k, double bin_hz, double fraction = 0.85) {
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += m[i] * m[i];
    if (total <= 0.0) return 0.0;
    const double target = fraction * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        acc += m[i] * m[i];
        if (acc >= target) return static_cast<double>(i) * bin_hz;
    }
    return static_cast<double>(k - 1) * bin_hz;
}

// Shannon entropy (bits) of the sum-normalized magnitude spectrum.
inline double entropy(const double* m, std::size_t k) {
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += m[i];
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (m[i] <= 0.0) continue;
        const double p = m[i] / total;
        h -= p * std::log2(p);
    }
    return h;
}

inline double decrease(const double* m, std::size_t k) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i < k; ++i) {
        num += (m[i] - m[0]) / static_cast<double>(i);
        den += m[i];
    }
    return den > 0.0 ? num / den : 0.0;
}

inline double peak_count(const double* m, std::size_t k, double rel_threshold = 0.005) {
    if (k < 3) return 0.0;
    double peak = 0.0;
    for (std::size_t i = 0; i < k; ++i) peak = std::max(peak, m[i]);
    if (peak <= 0.0) return 0.0;
    const double thr = rel_threshold * peak;
    int count = 0;
    for (std::size_t i = 1; i + 1 < k; ++i)
        if (m[i] > m[i - 1] && m[i] >= m[i + 1] && m[i] > thr) ++count;
    return static_cast<double>(count);
}

// Peak of the sum-normalized autocorrelation of the magnitude spectrum at
// nonzero lag; in [0, 1] by Cauchy-Schwarz.
inline double salience(const double* m, std::size_t k) {
    double r0 = 0.0;
    for (std::size_t i = 0; i < k; ++i) r0 += m[i] * m[i];
    if (r0 <= 0.0) return 0.0;
    double best = 0.0;
    for (std::size_t lag = 1; lag < k; ++lag) {
        double r = 0.0;
        for (std::size_t i = 0; i + lag < k; ++i) r += m[i] * m[i + lag];
        best = std::max(best, r / r0);
    }
    return best;
}

// Energy in [lo_hz, hi_hz) as a fraction of total frame energy.
inline double band_ratio(const double* m, std::size_t k, double bin_hz, double lo_hz, double hi_hz) {
    double total = 0.0, band = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double e = m[i] * m[i];
        total += e;
        const double f = static_cast<double>(i) * bin_hz;
        if (f >= lo_hz && f < hi_hz) band += e;
    }
    return total > 0.0 ? band / total : 0.0;
}

}  // namespace frames

// L2 distance of consecutive L2-normalized magnitude spectra, averaged over
// frame pairs. 0 when fewer than two frames.
inline double mean_spectral_flux(const Spectrogram& s) {
    if (s.frames() < 2) return 0.0;
    const std::size_t k = s.bins();
    std::vector<double> prev(k), cur(k);
    auto normalize = [&](const double* row, std::vector<double>& out) {
        double norm = 0.0;
        for (std::size_t i = 0; i < k; ++i) norm += row[i] * row[i];
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < k; ++i) out[i] = norm > 0.0 ? row[i] / norm : 0.0;
    };
    normalize(s.mags.row(0), prev);
    double acc = 0.0;
    for (std::size_t t = 1; t < s.frames(); ++t) {
        normalize(s.mags.row(t), cur);
        double d = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double diff = cur[i] - prev[i];
            d += diff * diff;
        }
        acc += std::sqrt(d);
        std::swap(prev, cur);
    }
    return acc / static_cast<double>(s.frames() - 1);
}

// Half-wave-rectified spectral-flux novelty curve; length frames-1.
inline std::vector<double> novelty_curve(const Spectrogram& s) {
    if (s.frames() < 2) return {};
    std::vector<double> nov(s.frames() - 1, 0.0);
    const std::size_t k = s.bins();
    for (std::size_t t = 1; t < s.frames(); ++t) {
        const double* a = s.mags.row(t - 1);
        const double* b = s.mags.row(t);
        double acc = 0.0;
        for (std::size_t i = 0; i < k; ++i) acc += std::max(0.0, b[i] - a[i]);
        nov[t - 1] = acc;
    }
    return nov;
}

// RMS per frame on the same framing grid as stft.
inline std::vector<double> frame_rms_series(const audio::AudioClip& clip, int frame_size, int hop) {
    const std::size_t n = clip.samples.size();
    const std::size_t fs = static_cast<std::size_t>(frame_size);
    if (n < fs) return {};
    const std::size_t n_frames = 1 + (n - fs) / static_cast<std::size_t>(hop);
    std::vector<double> rms(n_frames);
    for (std::size_t t = 0; t < n_frames; ++t) {
        const double* x = clip.samples.data() + t * static_cast<std::size_t>(hop);
        double acc = 0.0;
        for (std::size_t i = 0; i < fs; ++i) acc += x[i] * x[i];
        rms[t] = std::sqrt(acc / static_cast<double>(fs));
    }
    return rms;
}

// Sign changes per second over the whole clip; sign(0) counts as positive.
inline double zero_crossing_rate(const audio::AudioClip& clip) {
    if (clip.samples.size() < 2) return 0.0;
    std::size_t count = 0;
    bool prev_nonneg = clip.samples[0] >= 0.0;
    for (std::size_t i = 1; i < clip.samples.size(); ++i) {
        const bool nonneg = clip.samples[i] >= 0.0;
        if (nonneg != prev_nonneg) ++count;
        prev_nonneg = nonneg;
    }
    return static_cast<double>(count) / clip.duration_seconds();
}

}  // namespace tagscope::dsp
