#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tagscope/common.hpp"

namespace tagscope::audio {

// Decoded mono PCM. Samples are normalized to [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = 0;
    std::string source_path;

    double duration_seconds() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

constexpr int kCanonicalRate = 22050;

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

inline std::uint32_t le32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline std::uint16_t le16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t be32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

struct RawPcm {
    std::vector<double> interleaved;
    int channels = 0;
    int rate = 0;
};

inline RawPcm parse_wav(const std::vector<std::uint8_t>& b, const std::string& path) {
    if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(b.data() + 8, "WAVE", 4) != 0)
        throw UnsupportedFormat("not a RIFF/WAVE file: " + path);

    int format = 0, channels = 0, bits = 0, rate = 0;
    bool have_fmt = false;
    const std::uint8_t* data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= b.size()) {
        const char* id = reinterpret_cast<const char*>(b.data() + pos);
        const std::size_t size = le32(b.data() + pos + 4);
        pos += 8;
        if (size > b.size() - pos)
            throw CorruptHeader("chunk '" + std::string(id, 4) + "' overruns file: " + path);
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (size < 16) throw CorruptHeader("fmt chunk too small: " + path);
            format = le16(b.data() + pos);
            channels = le16(b.data() + pos + 2);
            rate = static_cast<int>(le32(b.data() + pos + 4));
            bits = le16(b.data() + pos + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = b.data() + pos;
            data_size = size;
        }
        pos += size + (size & 1);  // chunks are word-aligned
    }
    if (!have_fmt) throw CorruptHeader("missing fmt chunk: " + path);
    if (data == nullptr) throw CorruptHeader("missing data chunk: " + path);
    if (channels <= 0 || rate <= 0) throw CorruptHeader("bad fmt fields: " + path);

    const bool pcm16 = format == 1 && bits == 16;
    const bool pcm24 = format == 1 && bits == 24;
    const bool f32 = format == 3 && bits == 32;
    if (!pcm16 && !pcm24 && !f32)
        throw UnsupportedFormat("unsupported WAV codec (format " + std::to_string(format) +
                                ", " + std::to_string(bits) + " bit): " + path);

    const std::size_t bytes_per = static_cast<std::size_t>(bits / 8);
    const std::size_t frame_bytes = bytes_per * static_cast<std::size_t>(channels);
    if (data_size % frame_bytes != 0)
        throw CorruptHeader("data size not a whole number of frames: " + path);

    RawPcm out;
    out.channels = channels;
    out.rate = rate;
    const std::size_t n = data_size / bytes_per;
    out.interleaved.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* p = data + i * bytes_per;
        if (pcm16) {
            const std::int16_t v = static_cast<std::int16_t>(le16(p));
            out.interleaved[i] = v / 32768.0;
        } else if (pcm24) {
            std::int32_t v = static_cast<std::int32_t>(p[0]) | (static_cast<std::int32_t>(p[1]) << 8) |
                             (static_cast<std::int32_t>(p[2]) << 16);
            if (v & 0x800000) v -= 0x1000000;
            out.interleaved[i] = v / 8388608.0;
        } else {
            float f;
            std::uint32_t u = le32(p);
            std::memcpy(&f, &u, 4);
            out.interleaved[i] = std::clamp(static_cast<double>(f), -1.0, 1.0);
        }
    }
    return out;
}

inline RawPcm parse_au(const std::vector<std::uint8_t>& b, const std::string& path) {
    if (b.size() < 24 || std::memcmp(b.data(), ".snd", 4) != 0)
        throw UnsupportedFormat("not a Sun AU file: " + path);
    const std::uint32_t offset = be32(b.data() + 4);
    const std::uint32_t size = be32(b.data() + 8);
    const std::uint32_t encoding = be32(b.data() + 12);
    const std::uint32_t rate = be32(b.data() + 16);
    const std::uint32_t channels = be32(b.data() + 20);

    if (offset < 24 || offset > b.size())
        throw CorruptHeader("bad AU data offset: " + path);
    std::size_t avail = b.size() - offset;
    if (size != 0xFFFFFFFFu) {
        if (size > avail) throw CorruptHeader("AU declared size exceeds file: " + path);
        avail = size;
    }
    if (channels == 0 || rate == 0) throw CorruptHeader("bad AU header fields: " + path);

    int bytes_per = 0;
    switch (encoding) {
        case 2: bytes_per = 1; break;  // 8-bit linear PCM
        case 3: bytes_per = 2; break;  // 16-bit
        case 4: bytes_per = 3; break;  // 24-bit
        case 5: bytes_per = 4; break;  // 32-bit
        default:
            throw UnsupportedFormat("unsupported AU encoding " + std::to_string(encoding) + ": " + path);
    }

    RawPcm out;
    out.channels = static_cast<int>(channels);
    out.rate = static_cast<int>(rate);
    const std::size_t n = avail / static_cast<std::size_t>(bytes_per);
    out.interleaved.resize(n);
    const std::uint8_t* data = b.data() + offset;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* p = data + i * static_cast<std::size_t>(bytes_per);
        switch (encoding) {
            case 2: {
                out.interleaved[i] = static_cast<std::int8_t>(p[0]) / 128.0;
                break;
            }
            case 3: {
                const std::int16_t v = static_cast<std::int16_t>((p[0] << 8) | p[1]);
                out.interleaved[i] = v / 32768.0;
                break;
            }
            case 4: {
                std::int32_t v = (static_cast<std::int32_t>(p[0]) << 16) |
                                 (static_cast<std::int32_t>(p[1]) << 8) | p[2];
                if (v & 0x800000) v -= 0x1000000;
                out.interleaved[i] = v / 8388608.0;
                break;
            }
            default: {
                const std::int32_t v = static_cast<std::int32_t>(be32(p));
                out.interleaved[i] = v / 2147483648.0;
                break;
            }
        }
    }
    return out;
}

inline std::vector<double> downmix(const RawPcm& raw) {
    const std::size_t ch = static_cast<std::size_t>(raw.channels);
    const std::size_t frames = raw.interleaved.size() / ch;
    std::vector<double> mono(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < ch; ++c) acc += raw.interleaved[i * ch + c];
        mono[i] = acc / static_cast<double>(ch);
    }
    return mono;
}

inline double bessel_i0(double x) {
    double sum = 1.0, term = 1.0;
    const double half = x / 2.0;
    for (int k = 1; k < 64; ++k) {
        term *= (half / k) * (half / k);
        sum += term;
        if (term < sum * 1e-14) break;
    }
    return sum;
}

}  // namespace detail

// Windowed-sinc resampler, 64-tap Kaiser window. The cutoff is scaled on
// downsampling so the passband stays below the output Nyquist.
inline std::vector<double> resample(const std::vector<double>& x, int rate_in, int rate_out) {
    if (rate_in == rate_out || x.empty()) return x;
    constexpr int kHalfTaps = 32;  // 64-tap kernel
    constexpr double kBeta = 8.6;
    const double ratio = static_cast<double>(rate_in) / rate_out;
    const double cutoff = std::min(1.0, 1.0 / ratio);
    const double i0_beta = detail::bessel_i0(kBeta);
    const std::size_t n_out =
        static_cast<std::size_t>(std::floor(static_cast<double>(x.size()) / ratio));
    std::vector<double> y(std::max<std::size_t>(n_out, 1), 0.0);

    for (std::size_t n = 0; n < y.size(); ++n) {
        const double t = static_cast<double>(n) * ratio;
        const long center = static_cast<long>(std::floor(t));
        double acc = 0.0, wsum = 0.0;
        for (long k = center - kHalfTaps + 1; k <= center + kHalfTaps; ++k) {
            const double d = t - static_cast<double>(k);
            const double u = d / kHalfTaps;
            if (u <= -1.0 || u >= 1.0) continue;
            const double window = detail::bessel_i0(kBeta * std::sqrt(1.0 - u * u)) / i0_beta;
            const double arg = 3.14159265358979323846 * cutoff * d;
            const double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(arg) / arg;
            const double w = cutoff * sinc * window;
            wsum += w;
            if (k >= 0 && k < static_cast<long>(x.size())) acc += w * x[static_cast<std::size_t>(k)];
        }
        // normalizing by the kernel sum keeps DC exact
        y[n] = wsum != 0.0 ? acc / wsum : 0.0;
    }
    return y;
}

// Decode a WAV or AU file to a normalized mono clip at target_rate.
inline AudioClip decode(const std::string& path, int target_rate = kCanonicalRate) {
    const auto bytes = detail::read_file(path);
    if (bytes.size() < 4) throw UnsupportedFormat("file too small to identify: " + path);

    detail::RawPcm raw;
    if (std::memcmp(bytes.data(), "RIFF", 4) == 0)
        raw = detail::parse_wav(bytes, path);
    else if (std::memcmp(bytes.data(), ".snd", 4) == 0)
        raw = detail::parse_au(bytes, path);
    else
        throw UnsupportedFormat("unknown magic bytes: " + path);

    if (raw.interleaved.empty()) throw EmptyAudio("no samples: " + path);

    AudioClip clip;
    clip.source_path = path;
    clip.sample_rate = target_rate;
    std::vector<double> mono = detail::downmix(raw);
    if (raw.rate != target_rate) mono = resample(mono, raw.rate, target_rate);
    if (mono.empty()) throw EmptyAudio("no samples after resampling: " + path);
    for (double& v : mono) v = std::clamp(v, -1.0, 1.0);
    clip.samples = std::move(mono);
    return clip;
}

// 16-bit PCM writer; `channels` holds one sample vector per channel, all the
// same length.
inline void write_wav(const std::string& path, const std::vector<std::vector<double>>& channels,
                      int rate) {
    if (channels.empty() || channels[0].empty()) throw Error("nothing to write: " + path);
    const std::size_t frames = channels[0].size();
    const std::uint16_t ch = static_cast<std::uint16_t>(channels.size());
    const std::uint32_t data_size = static_cast<std::uint32_t>(frames * ch * 2);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    auto w16 = [&](std::uint16_t v) { out.put(static_cast<char>(v & 0xff)); out.put(static_cast<char>(v >> 8)); };
    auto w32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    out.write("RIFF", 4);
    w32(36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    w32(16);
    w16(1);  // PCM
    w16(ch);
    w32(static_cast<std::uint32_t>(rate));
    w32(static_cast<std::uint32_t>(rate) * ch * 2);
    w16(static_cast<std::uint16_t>(ch * 2));
    w16(16);
    out.write("data", 4);
    w32(data_size);
    for (std::size_t i = 0; i < frames; ++i) {
        for (std::size_t c = 0; c < ch; ++c) {
            const double v = std::clamp(channels[c][i], -1.0, 1.0);
            const long q = std::lround(v * 32768.0);
            w16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768l, 32767l))));
        }
    }
}

inline void write_wav_mono(const std::string& path, const std::vector<double>& samples, int rate) {
    write_wav(path, {samples}, rate);
}

// Sun AU writer, encoding 3 (16-bit big-endian linear PCM), mono.
inline void write_au_mono(const std::string& path, const std::vector<double>& samples, int rate) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    auto wbe32 = [&](std::uint32_t v) {
        for (int i = 3; i >= 0; --i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    out.write(".snd", 4);
    wbe32(24);
    wbe32(static_cast<std::uint32_t>(samples.size() * 2));
    wbe32(3);
    wbe32(static_cast<std::uint32_t>(rate));
    wbe32(1);
    for (double s : samples) {
        const long q = std::lround(std::clamp(s, -1.0, 1.0) * 32768.0);
        const std::int16_t v = static_cast<std::int16_t>(std::clamp(q, -32768l, 32767l));
        out.put(static_cast<char>((static_cast<std::uint16_t>(v) >> 8) & 0xff));
        out.put(static_cast<char>(static_cast<std::uint16_t>(v) & 0xff));
    }
}

}  // namespace tagscope::audio
