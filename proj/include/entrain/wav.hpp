#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "entrain/error.hpp"

namespace entrain::wav {

// RIFF/WAVE reader for PCM 16-bit LE and IEEE float 32, 1-2 channels.
// Unknown chunks are skipped. Writer emits PCM 16-bit mono.

struct WavData {
    int sample_rate = 0;
    int channels = 0;
    std::vector<float> samples;  // interleaved
};

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline double bessel_i0(double x) {
    // series expansion, converges quickly for the kaiser arguments used
    double sum = 1.0, term = 1.0;
    const double q = 0.25 * x * x;
    for (int k = 1; k < 64; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-16) break;
    }
    return sum;
}

} // namespace detail

inline WavData read_wav(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw Error(ErrorCode::CorruptHeader, "not a RIFF/WAVE container");

    WavData out;
    int bits = 0, format = 0;
    bool have_fmt = false, have_data = false;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        const std::uint32_t size = detail::read_u32(bytes.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > bytes.size())
            throw Error(ErrorCode::CorruptHeader, "truncated chunk");
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (size < 16) throw Error(ErrorCode::CorruptHeader, "short fmt chunk");
            format = detail::read_u16(bytes.data() + body);
            out.channels = detail::read_u16(bytes.data() + body + 2);
            out.sample_rate = static_cast<int>(detail::read_u32(bytes.data() + body + 4));
            bits = detail::read_u16(bytes.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            if (!have_fmt) throw Error(ErrorCode::CorruptHeader, "data before fmt");
            if (format == 1 && bits == 16) {
                const std::size_t n = size / 2;
                out.samples.resize(n);
                for (std::size_t i = 0; i < n; ++i) {
                    std::int16_t v = static_cast<std::int16_t>(
                        detail::read_u16(bytes.data() + body + 2 * i));
                    out.samples[i] = static_cast<float>(v) / 32768.0f;
                }
            } else if (format == 3 && bits == 32) {
                const std::size_t n = size / 4;
                out.samples.resize(n);
                for (std::size_t i = 0; i < n; ++i) {
                    std::uint32_t u = detail::read_u32(bytes.data() + body + 4 * i);
                    float f;
                    std::memcpy(&f, &u, 4);
                    out.samples[i] = f;
                }
            } else {
                throw Error(ErrorCode::UnsupportedEncoding,
                            "need PCM16 or float32, got format " + std::to_string(format) +
                                "/" + std::to_string(bits) + " bit");
            }
            have_data = true;
        }
        pos = body + size + (size & 1);  // chunks are word-aligned
    }
    if (!have_fmt || !have_data)
        throw Error(ErrorCode::CorruptHeader, "missing fmt or data chunk");
    if (out.channels < 1 || out.channels > 2)
        throw Error(ErrorCode::UnsupportedEncoding,
                    std::to_string(out.channels) + " channels");
    return out;
}

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                      std::istreambuf_iterator<char>());
}

inline void write_wav_pcm16(const std::string& path, const std::vector<float>& mono,
                            int sample_rate) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    auto put_u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        out.write(reinterpret_cast<char*>(b), 4);
    };
    auto put_u16 = [&](std::uint16_t v) {
        unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
        out.write(reinterpret_cast<char*>(b), 2);
    };
    const std::uint32_t data_size = static_cast<std::uint32_t>(mono.size() * 2);
    out.write("RIFF", 4);
    put_u32(36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put_u32(16);
    put_u16(1);  // PCM
    put_u16(1);  // mono
    put_u32(static_cast<std::uint32_t>(sample_rate));
    put_u32(static_cast<std::uint32_t>(sample_rate * 2));
    put_u16(2);
    put_u16(16);
    out.write("data", 4);
    put_u32(data_size);
    for (float s : mono) {
        const float c = std::fmin(1.0f, std::fmax(-1.0f, s));
        const auto v = static_cast<std::int16_t>(std::lrintf(c * 32767.0f));
        put_u16(static_cast<std::uint16_t>(v));
    }
}

inline constexpr int kResampleHalfTaps = 32;   // 64-tap kernel
inline constexpr double kResampleCutoffHz = 7600.0;
inline constexpr double kKaiserBeta = 8.0;

/// Windowed-sinc resampling to `out_rate`. Kaiser window, 64 taps, 7.6 kHz
/// cutoff; per-position kernel normalization keeps DC gain exactly 1.
inline std::vector<float> resample(const std::vector<float>& x, int in_rate, int out_rate) {
    if (in_rate == out_rate) return x;
    const double ratio = static_cast<double>(in_rate) / static_cast<double>(out_rate);
    const double fc = kResampleCutoffHz / static_cast<double>(in_rate);  // cycles/sample
    const double i0_beta = detail::bessel_i0(kKaiserBeta);
    const std::size_t n_in = x.size();
    const std::size_t n_out = static_cast<std::size_t>(
        std::floor(static_cast<double>(n_in) * out_rate / in_rate));
    std::vector<float> y(n_out);
    for (std::size_t n = 0; n < n_out; ++n) {
        const double t = static_cast<double>(n) * ratio;
        const auto k_lo = static_cast<long>(std::ceil(t)) - kResampleHalfTaps;
        const auto k_hi = static_cast<long>(std::floor(t)) + kResampleHalfTaps;
        double acc = 0.0, wsum = 0.0;
        for (long k = k_lo; k <= k_hi; ++k) {
            const double m = t - static_cast<double>(k);
            const double frac = m / kResampleHalfTaps;
            if (frac <= -1.0 || frac >= 1.0) continue;
            const double window =
                detail::bessel_i0(kKaiserBeta * std::sqrt(1.0 - frac * frac)) / i0_beta;
            double sinc;
            const double arg = 2.0 * fc * m;
            if (std::fabs(arg) < 1e-12) {
                sinc = 1.0;
            } else {
                const double pa = 3.14159265358979323846 * arg;
                sinc = std::sin(pa) / pa;
            }
            const double h = 2.0 * fc * sinc * window;
            wsum += h;
            if (k >= 0 && k < static_cast<long>(n_in))
                acc += static_cast<double>(x[static_cast<std::size_t>(k)]) * h;
        }
        y[n] = static_cast<float>((wsum != 0.0) ? acc / wsum : 0.0);
    }
    return y;
}

} // namespace entrain::wav
