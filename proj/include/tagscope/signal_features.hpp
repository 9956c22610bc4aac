#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tagscope/dsp.hpp"
#include "tagscope/harmony_types.hpp"

namespace tagscope::signal {

constexpr int kFrameSize = 2048;
constexpr int kHop = 1024;
constexpr int kMfccCoeffs = 40;
constexpr int kMelBands = 40;
constexpr double kMfccWindowSeconds = 15.0;
constexpr double kDbFloor = -120.0;

// The 23 scalar descriptors, in canonical order.
struct SignalFeatures {
    double danceability = 0.0;
    double loudness_db = 0.0;
    double chords_changes_rate = 0.0;
    double dynamic_complexity_db = 0.0;
    double zero_crossing_rate = 0.0;
    double chords_number_rate = 0.0;
    double pitch_salience = 0.0;
    double spectral_centroid = 0.0;
    double spectral_complexity = 0.0;
    double spectral_decrease = 0.0;
    double energy_high = 0.0;
    double energy_low = 0.0;
    double energy_mid_high = 0.0;
    double energy_mid_low = 0.0;
    double spectral_entropy = 0.0;
    double spectral_flux = 0.0;
    double spectral_rolloff = 0.0;
    double spectral_spread = 0.0;
    double onset_rate = 0.0;
    double length_s = 0.0;
    double bpm = 0.0;
    double beats_loud = 0.0;
    double vocal_instrumental = 0.5;

    static constexpr int kDim = 23;

    static const std::array<std::string, kDim>& names() {
        static const std::array<std::string, kDim> n = {
            "danceability",      "loudness_db",        "chords_changes_rate",
            "dynamic_complexity_db", "zero_crossing_rate", "chords_number_rate",
            "pitch_salience",    "spectral_centroid",  "spectral_complexity",
            "spectral_decrease", "energy_high",        "energy_low",
            "energy_mid_high",   "energy_mid_low",     "spectral_entropy",
            "spectral_flux",     "spectral_rolloff",   "spectral_spread",
            "onset_rate",        "length_s",           "bpm",
            "beats_loud",        "vocal_instrumental"};
        return n;
    }

    std::array<double, kDim> values() const {
        return {danceability,      loudness_db,       chords_changes_rate,
                dynamic_complexity_db, zero_crossing_rate, chords_number_rate,
                pitch_salience,    spectral_centroid, spectral_complexity,
                spectral_decrease, energy_high,       energy_low,
                energy_mid_high,   energy_mid_low,    spectral_entropy,
                spectral_flux,     spectral_rolloff,  spectral_spread,
                onset_rate,        length_s,          bpm,
                beats_loud,        vocal_instrumental};
    }
};

struct MfccMatrix {
    Matrix coefficients;  // S x 40

    std::size_t frame_count() const { return coefficients.rows; }
    std::size_t coeff_count() const { return coefficients.cols; }
};

struct TempoEstimate {
    double bpm = 0.0;
    std::vector<double> beats;  // seconds, strictly increasing
    double onset_rate = 0.0;
    std::vector<double> onsets;  // seconds
};

namespace detail {

// Detrended fluctuation analysis exponent of a series; negative when the
// series is too short or fluctuation-free.
inline double dfa_exponent(const std::vector<double>& s) {
    const std::size_t n = s.size();
    if (n < 16) return -1.0;
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> profile(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += s[i] - mean;
        profile[i] = acc;
    }

    std::vector<double> log_n, log_f;
    for (double box = 4.0; box <= static_cast<double>(n) / 4.0; box *= 1.5) {
        const std::size_t bn = static_cast<std::size_t>(box);
        const std::size_t boxes = n / bn;
        double res_acc = 0.0;
        for (std::size_t b = 0; b < boxes; ++b) {
            const double* y = profile.data() + b * bn;
            // least-squares line over the box
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < bn; ++i) {
                const double x = static_cast<double>(i);
                sx += x; sy += y[i]; sxx += x * x; sxy += x * y[i];
            }
            const double m = static_cast<double>(bn);
            const double denom = m * sxx - sx * sx;
            const double slope = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
            const double icept = (sy - slope * sx) / m;
            for (std::size_t i = 0; i < bn; ++i) {
                const double d = y[i] - (icept + slope * static_cast<double>(i));
                res_acc += d * d;
            }
        }
        const double f = std::sqrt(res_acc / static_cast<double>(boxes * bn));
        if (f <= 1e-15) return -1.0;
        log_n.push_back(std::log(static_cast<double>(bn)));
        log_f.push_back(std::log(f));
    }
    if (log_n.size() < 2) return -1.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        sx += log_n[i]; sy += log_f[i]; sxx += log_n[i] * log_n[i]; sxy += log_n[i] * log_f[i];
    }
    const double m = static_cast<double>(log_n.size());
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

inline std::vector<std::size_t> pick_onset_frames(const std::vector<double>& nov) {
    std::vector<std::size_t> onsets;
    if (nov.size() < 3) return onsets;
    double mean = 0.0;
    for (double v : nov) mean += v;
    mean /= static_cast<double>(nov.size());
    const double margin = 0.1 * mean;
    constexpr std::size_t kLocal = 2;   // local-max neighborhood
    constexpr std::size_t kMedian = 8;  // moving-median half window
    std::vector<double> win;
    for (std::size_t i = 0; i < nov.size(); ++i) {
        if (nov[i] <= 0.0) continue;
        bool is_max = true;
        const std::size_t lo = i >= kLocal ? i - kLocal : 0;
        const std::size_t hi = std::min(nov.size() - 1, i + kLocal);
        for (std::size_t j = lo; j <= hi && is_max; ++j)
            if (nov[j] > nov[i] || (nov[j] == nov[i] && j < i)) is_max = false;
        if (!is_max) continue;
        const std::size_t mlo = i >= kMedian ? i - kMedian : 0;
        const std::size_t mhi = std::min(nov.size() - 1, i + kMedian);
        win.assign(nov.begin() + static_cast<long>(mlo), nov.begin() + static_cast<long>(mhi) + 1);
        std::nth_element(win.begin(), win.begin() + static_cast<long>(win.size() / 2), win.end());
        const double median = win[win.size() / 2];
        if (nov[i] > median + margin) onsets.push_back(i);
    }
    return onsets;
}

// Tempo and beat grid from a novelty curve sampled at frame_rate.
inline TempoEstimate tempo_from_novelty(const std::vector<double>& nov, double frame_rate,
                                        double duration, double time_offset) {
    TempoEstimate est;
    const auto onset_frames = pick_onset_frames(nov);
    est.onsets.reserve(onset_frames.size());
    for (std::size_t f : onset_frames)
        est.onsets.push_back(static_cast<double>(f) / frame_rate + time_offset);
    est.onset_rate = duration > 0.0 ? static_cast<double>(est.onsets.size()) / duration : 0.0;

    if (duration < 3.0 || nov.size() < 8) return est;

    double mean = 0.0;
    for (double v : nov) mean += v;
    mean /= static_cast<double>(nov.size());
    if (mean <= 0.0) return est;
    std::vector<double> centered(nov.size());
    for (std::size_t i = 0; i < nov.size(); ++i) centered[i] = nov[i] - mean;

    // lag window spanning the [60, 180] BPM fold range
    const std::size_t lag_lo = std::max<std::size_t>(2, static_cast<std::size_t>(frame_rate / 3.0));
    const std::size_t lag_hi = std::min(nov.size() - 2, static_cast<std::size_t>(frame_rate) + 1);
    if (lag_hi <= lag_lo) return est;

    auto autocorr = [&](std::size_t lag) {
        double r = 0.0;
        for (std::size_t i = 0; i + lag < centered.size(); ++i) r += centered[i] * centered[i + lag];
        return r;
    };
    std::size_t best_lag = 0;
    double best_r = 0.0;
    for (std::size_t lag = lag_lo; lag <= lag_hi; ++lag) {
        const double r = autocorr(lag);
        if (r > best_r) {
            best_r = r;
            best_lag = lag;
        }
    }
    if (best_lag == 0 || best_r <= 0.0) return est;

    // parabolic refinement around the autocorrelation peak
    const double rm = autocorr(best_lag - 1), r0 = best_r, rp = autocorr(best_lag + 1);
    double lag_ref = static_cast<double>(best_lag);
    const double denom = rm - 2.0 * r0 + rp;
    if (denom < 0.0) lag_ref += 0.5 * (rm - rp) / denom;
    double bpm = 60.0 * frame_rate / lag_ref;

    // refine from inter-onset intervals when the onsets are regular
    if (est.onsets.size() >= 4) {
        std::vector<double> iois;
        for (std::size_t i = 1; i < est.onsets.size(); ++i)
            iois.push_back(est.onsets[i] - est.onsets[i - 1]);
        std::vector<double> sorted = iois;
        std::sort(sorted.begin(), sorted.end());
        const double med = sorted[sorted.size() / 2];
        double acc = 0.0;
        std::size_t cnt = 0;
        for (double v : iois)
            if (v >= 0.5 * med && v <= 1.5 * med) {
                acc += v;
                ++cnt;
            }
        if (cnt >= 3 && acc > 0.0) {
            double cand = 60.0 * static_cast<double>(cnt) / acc;
            while (cand > 180.0) cand /= 2.0;
            while (cand < 60.0 && cand > 0.0) cand *= 2.0;
            double folded = bpm;
            while (folded > 180.0) folded /= 2.0;
            while (folded < 60.0 && folded > 0.0) folded *= 2.0;
            if (std::abs(cand - folded) <= 0.15 * folded) bpm = cand;
        }
    }
    while (bpm > 180.0) bpm /= 2.0;
    while (bpm < 60.0 && bpm > 0.0) bpm *= 2.0;
    est.bpm = bpm;

    // beat grid: phase of the comb maximizing novelty pickup
    const double period_frames = 60.0 * frame_rate / bpm;
    const std::size_t max_phase = static_cast<std::size_t>(period_frames);
    double best_score = -1.0;
    std::size_t best_phase = 0;
    for (std::size_t phase = 0; phase <= max_phase; ++phase) {
        double score = 0.0;
        for (double p = static_cast<double>(phase); p < static_cast<double>(nov.size());
             p += period_frames) {
            const std::size_t idx = static_cast<std::size_t>(p + 0.5);
            if (idx < nov.size()) score += nov[idx];
        }
        if (score > best_score) {
            best_score = score;
            best_phase = phase;
        }
    }
    for (double p = static_cast<double>(best_phase); p < static_cast<double>(nov.size());
         p += period_frames)
        est.beats.push_back(p / frame_rate + time_offset);
    return est;
}

}  // namespace detail

inline TempoEstimate estimate_tempo(const audio::AudioClip& clip) {
    if (clip.samples.size() < static_cast<std::size_t>(kFrameSize)) return {};
    const dsp::Spectrogram spec = dsp::stft(clip, kFrameSize, kHop);
    const std::vector<double> nov = dsp::novelty_curve(spec);
    const double frame_rate = static_cast<double>(clip.sample_rate) / kHop;
    const double offset = (static_cast<double>(kHop) + kFrameSize / 2.0) / clip.sample_rate;
    return detail::tempo_from_novelty(nov, frame_rate, clip.duration_seconds(), offset);
}

// MFCCs over the first 15 seconds: Hann/FFT 2048, 40 mel bands, log, DCT-II.
inline MfccMatrix mfcc(const audio::AudioClip& clip) {
    if (clip.samples.empty()) throw TooShort("empty clip");
    const std::size_t limit = static_cast<std::size_t>(kMfccWindowSeconds * clip.sample_rate);
    std::vector<double> samples(clip.samples.begin(),
                                clip.samples.begin() +
                                    static_cast<long>(std::min(clip.samples.size(), limit)));
    if (samples.size() < static_cast<std::size_t>(kFrameSize))
        samples.resize(kFrameSize, 0.0);  // pad short clips to one frame

    audio::AudioClip head;
    head.samples = std::move(samples);
    head.sample_rate = clip.sample_rate;
    const dsp::Spectrogram spec = dsp::stft(head, kFrameSize, kHop);

    // triangular mel filterbank over [0, Nyquist]
    const double nyquist = clip.sample_rate / 2.0;
    auto to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
    auto from_mel = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
    std::array<double, kMelBands + 2> edges_hz{};
    const double mel_hi = to_mel(nyquist);
    for (int i = 0; i < kMelBands + 2; ++i)
        edges_hz[static_cast<std::size_t>(i)] = from_mel(mel_hi * i / (kMelBands + 1));

    const std::size_t n_bins = spec.bins();
    Matrix filters(kMelBands, n_bins);
    for (int b = 0; b < kMelBands; ++b) {
        const double lo = edges_hz[static_cast<std::size_t>(b)];
        const double mid = edges_hz[static_cast<std::size_t>(b + 1)];
        const double hi = edges_hz[static_cast<std::size_t>(b + 2)];
        for (std::size_t k = 0; k < n_bins; ++k) {
            const double f = static_cast<double>(k) * spec.bin_hz;
            double w = 0.0;
            if (f > lo && f < mid)
                w = (f - lo) / (mid - lo);
            else if (f == mid)
                w = 1.0;
            else if (f > mid && f < hi)
                w = (hi - f) / (hi - mid);
            filters.at(static_cast<std::size_t>(b), k) = w;
        }
    }

    MfccMatrix out;
    out.coefficients = Matrix(spec.frames(), kMfccCoeffs);
    const double scale0 = std::sqrt(1.0 / kMelBands);
    const double scale = std::sqrt(2.0 / kMelBands);
    std::array<double, kMelBands> log_energies{};
    for (std::size_t t = 0; t < spec.frames(); ++t) {
        const double* m = spec.mags.row(t);
        for (int b = 0; b < kMelBands; ++b) {
            double e = 0.0;
            const double* w = filters.row(static_cast<std::size_t>(b));
            for (std::size_t k = 0; k < n_bins; ++k) e += w[k] * m[k] * m[k];
            log_energies[static_cast<std::size_t>(b)] = std::log(std::max(e, 1e-10));
        }
        double* row = out.coefficients.row(t);
        for (int i = 0; i < kMfccCoeffs; ++i) {
            double acc = 0.0;
            for (int j = 0; j < kMelBands; ++j)
                acc += log_energies[static_cast<std::size_t>(j)] *
                       std::cos(dsp::kPi * i * (2.0 * j + 1.0) / (2.0 * kMelBands));
            row[i] = (i == 0 ? scale0 : scale) * acc;
        }
    }
    return out;
}

// All 23 descriptors of a clip. Chord-derived and vocal fields fall back to
// documented defaults when their inputs are absent.
inline SignalFeatures signal_descriptors(
    const audio::AudioClip& clip,
    const std::vector<harmony::ChordEvent>* chords = nullptr,
    std::optional<double> vocal_flag = std::nullopt) {
    const dsp::Spectrogram spec = dsp::stft(clip, kFrameSize, kHop);
    const double duration = clip.duration_seconds();
    const std::size_t n_bins = spec.bins();
    const double nyquist = clip.sample_rate / 2.0;

    SignalFeatures f;
    f.length_s = duration;
    f.vocal_instrumental = vocal_flag.value_or(0.5);

    double centroid = 0, spread = 0, rolloff = 0, entropy = 0, decrease = 0, complexity = 0,
           salience = 0, e_low = 0, e_midlow = 0, e_midhigh = 0, e_high = 0;
    for (std::size_t t = 0; t < spec.frames(); ++t) {
        const double* m = spec.mags.row(t);
        centroid += dsp::frames::centroid(m, n_bins, spec.bin_hz);
        spread += dsp::frames::spread(m, n_bins, spec.bin_hz);
        rolloff += dsp::frames::rolloff(m, n_bins, spec.bin_hz);
        entropy += dsp::frames::entropy(m, n_bins);
        decrease += dsp::frames::decrease(m, n_bins);
        complexity += dsp::frames::peak_count(m, n_bins);
        salience += dsp::frames::salience(m, n_bins);
        e_low += dsp::frames::band_ratio(m, n_bins, spec.bin_hz, 20.0, 150.0);
        e_midlow += dsp::frames::band_ratio(m, n_bins, spec.bin_hz, 150.0, 800.0);
        e_midhigh += dsp::frames::band_ratio(m, n_bins, spec.bin_hz, 800.0, 4000.0);
        e_high += dsp::frames::band_ratio(m, n_bins, spec.bin_hz, 4000.0, nyquist + spec.bin_hz);
    }
    const double nf = static_cast<double>(spec.frames());
    f.spectral_centroid = centroid / nf;
    f.spectral_spread = spread / nf;
    f.spectral_rolloff = rolloff / nf;
    f.spectral_entropy = entropy / nf;
    f.spectral_decrease = decrease / nf;
    f.spectral_complexity = complexity / nf;
    f.pitch_salience = salience / nf;
    f.energy_low = e_low / nf;
    f.energy_mid_low = e_midlow / nf;
    f.energy_mid_high = e_midhigh / nf;
    f.energy_high = e_high / nf;
    f.spectral_flux = dsp::mean_spectral_flux(spec);

    f.zero_crossing_rate = dsp::zero_crossing_rate(clip);

    double power = 0.0;
    for (double v : clip.samples) power += v * v;
    power /= static_cast<double>(clip.samples.size());
    f.loudness_db = std::max(kDbFloor, 10.0 * std::log10(std::max(power, 1e-300)));

    const std::vector<double> rms = dsp::frame_rms_series(clip, kFrameSize, kHop);
    if (!rms.empty()) {
        std::vector<double> rms_db(rms.size());
        double mean_db = 0.0;
        for (std::size_t i = 0; i < rms.size(); ++i) {
            rms_db[i] = std::max(kDbFloor, 20.0 * std::log10(std::max(rms[i], 1e-300)));
            mean_db += rms_db[i];
        }
        mean_db /= static_cast<double>(rms_db.size());
        double mad = 0.0;
        for (double v : rms_db) mad += std::abs(v - mean_db);
        f.dynamic_complexity_db = mad / static_cast<double>(rms_db.size());

        const double alpha = detail::dfa_exponent(rms);
        f.danceability = alpha < 0.0 ? 0.0 : std::clamp((3.0 - alpha) / 3.0, 0.0, 1.0);
    }

    const std::vector<double> nov = dsp::novelty_curve(spec);
    const double frame_rate = static_cast<double>(clip.sample_rate) / kHop;
    const double offset = (static_cast<double>(kHop) + kFrameSize / 2.0) / clip.sample_rate;
    const TempoEstimate tempo = detail::tempo_from_novelty(nov, frame_rate, duration, offset);
    f.bpm = tempo.bpm;
    f.onset_rate = tempo.onset_rate;
    if (!tempo.beats.empty() && !rms.empty()) {
        double acc = 0.0;
        std::size_t count = 0;
        for (std::size_t t = 0; t < rms.size(); ++t) {
            const double center = (static_cast<double>(t) * kHop + kFrameSize / 2.0) / clip.sample_rate;
            for (double b : tempo.beats) {
                if (std::abs(center - b) <= 0.05) {
                    acc += rms[t];
                    ++count;
                    break;
                }
            }
        }
        f.beats_loud = count > 0 ? acc / static_cast<double>(count) : 0.0;
    }

    if (chords != nullptr && !chords->empty() && duration > 0.0) {
        std::size_t changes = 0;
        std::set<std::pair<int, int>> distinct;
        for (std::size_t i = 0; i < chords->size(); ++i) {
            const auto& c = (*chords)[i];
            if (c.root >= 0) distinct.insert({c.root, static_cast<int>(c.quality)});
            if (i > 0) {
                const auto& p = (*chords)[i - 1];
                if (p.root != c.root || p.quality != c.quality) ++changes;
            }
        }
        f.chords_changes_rate = static_cast<double>(changes) / duration;
        f.chords_number_rate = static_cast<double>(distinct.size()) / duration;
    }
    return f;
}

}  // namespace tagscope::signal
