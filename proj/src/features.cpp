#include "sedkit/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace sedkit {

namespace {

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t read_u16(std::istream& is) {
    unsigned char b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

void write_u16(std::ostream& os, std::uint16_t v) {
    const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    os.write(b, 2);
}

}  // namespace

AudioClip read_wav(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_wav: cannot open " + path);
    char tag[4];
    is.read(tag, 4);
    if (!is || std::memcmp(tag, "RIFF", 4) != 0)
        throw std::runtime_error("read_wav: not a RIFF file: " + path);
    read_u32(is);
    is.read(tag, 4);
    if (!is || std::memcmp(tag, "WAVE", 4) != 0)
        throw std::runtime_error("read_wav: not a WAVE file: " + path);

    bool have_fmt = false;
    AudioClip clip;
    std::vector<char> payload;
    while (is.read(tag, 4)) {
        const std::uint32_t size = read_u32(is);
        if (!is) break;
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            if (size < 16) throw std::runtime_error("read_wav: malformed fmt chunk in " + path);
            const std::uint16_t format = read_u16(is);
            const std::uint16_t channels = read_u16(is);
            const std::uint32_t rate = read_u32(is);
            read_u32(is);  // byte rate
            read_u16(is);  // block align
            const std::uint16_t bits = read_u16(is);
            if (format != 1) throw std::runtime_error("read_wav: only PCM supported: " + path);
            if (channels != 1) throw std::runtime_error("read_wav: only mono supported: " + path);
            if (rate != kSampleRate)
                throw std::runtime_error("read_wav: sample rate must be 16000 Hz: " + path);
            if (bits != 16) throw std::runtime_error("read_wav: only 16-bit supported: " + path);
            is.ignore(size - 16 + (size % 2));
            clip.sample_rate = static_cast<int>(rate);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            payload.resize(size);
            is.read(payload.data(), size);
            if (static_cast<std::uint32_t>(is.gcount()) != size)
                throw std::runtime_error("read_wav: truncated data chunk in " + path);
            if (size % 2 == 1) is.ignore(1);
        } else {
            is.ignore(size + (size % 2));
        }
    }
    if (!have_fmt) throw std::runtime_error("read_wav: missing fmt chunk in " + path);
    if (payload.empty()) throw std::runtime_error("read_wav: missing or empty data chunk in " + path);
    clip.samples.resize(payload.size() / 2);
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        const std::int16_t v = static_cast<std::int16_t>(
            static_cast<unsigned char>(payload[2 * i]) |
            (static_cast<unsigned char>(payload[2 * i + 1]) << 8));
        clip.samples[i] = static_cast<float>(v) / 32768.0f;
    }
    return clip;
}

void write_wav(const std::string& path, const AudioClip& clip) {
    if (clip.sample_rate != kSampleRate)
        throw std::invalid_argument("write_wav: sample rate must be 16000 Hz");
    if (clip.samples.empty()) throw std::invalid_argument("write_wav: empty clip");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_wav: cannot open " + path);
    const std::uint32_t data_size = static_cast<std::uint32_t>(clip.samples.size() * 2);
    os.write("RIFF", 4);
    write_u32(os, 36 + data_size);
    os.write("WAVE", 4);
    os.write("fmt ", 4);
    write_u32(os, 16);
    write_u16(os, 1);
    write_u16(os, 1);
    write_u32(os, kSampleRate);
    write_u32(os, kSampleRate * 2);
    write_u16(os, 2);
    write_u16(os, 16);
    os.write("data", 4);
    write_u32(os, data_size);
    for (float s : clip.samples) {
        const float clamped = std::clamp(s, -1.0f, 1.0f);
        const std::int16_t v = static_cast<std::int16_t>(std::lround(clamped * 32767.0f));
        write_u16(os, static_cast<std::uint16_t>(v));
    }
    if (!os) throw std::runtime_error("write_wav: write failed for " + path);
}

int frame_count(std::size_t n_samples) {
    return static_cast<int>(n_samples / kHopLength) + 1;
}

namespace {

// Iterative radix-2 complex FFT, n a power of two.
void fft_inplace(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
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

const std::vector<double>& hamming_window() {
    static const std::vector<double> w = [] {
        std::vector<double> v(kNFft);
        for (int n = 0; n < kNFft; ++n)
            v[static_cast<std::size_t>(n)] =
                0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / kNFft);
        return v;
    }();
    return w;
}

// Reflect index without edge repetition; period 2(len-1).
std::size_t reflect_index(long long i, std::size_t len) {
    if (len == 1) return 0;
    const long long period = 2 * (static_cast<long long>(len) - 1);
    long long j = i % period;
    if (j < 0) j += period;
    if (j >= static_cast<long long>(len)) j = period - j;
    return static_cast<std::size_t>(j);
}

}  // namespace

TensorF stft_magnitude(const AudioClip& clip) {
    if (clip.sample_rate != kSampleRate)
        throw std::invalid_argument("stft_magnitude: sample rate must be 16000 Hz");
    if (clip.samples.empty()) throw std::invalid_argument("stft_magnitude: empty signal");
    const std::size_t len = clip.samples.size();
    const int frames = frame_count(len);
    const auto& win = hamming_window();
    TensorF mag({kFftBins, frames});
    std::vector<std::complex<double>> buf(kNFft);
    const int half = kNFft / 2;
    for (int t = 0; t < frames; ++t) {
        const long long start = static_cast<long long>(t) * kHopLength - half;
        for (int n = 0; n < kNFft; ++n) {
            const std::size_t j = reflect_index(start + n, len);
            buf[static_cast<std::size_t>(n)] = {clip.samples[j] * win[static_cast<std::size_t>(n)],
                                                0.0};
        }
        fft_inplace(buf);
        for (int k = 0; k < kFftBins; ++k)
            mag.at(k, t) = static_cast<float>(std::abs(buf[static_cast<std::size_t>(k)]));
    }
    return mag;
}

std::vector<double> mel_breakpoints_hz() {
    auto hz_to_mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
    auto mel_to_hz = [](double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); };
    const double mel_lo = hz_to_mel(kFMin), mel_hi = hz_to_mel(kFMax);
    std::vector<double> hz(kMelBins + 2);
    for (int i = 0; i < kMelBins + 2; ++i)
        hz[static_cast<std::size_t>(i)] =
            mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (kMelBins + 1));
    return hz;
}

TensorF mel_filterbank() {
    const auto bp = mel_breakpoints_hz();
    TensorF fb({kMelBins, kFftBins});
    const double bin_hz = static_cast<double>(kSampleRate) / kNFft;
    for (int m = 0; m < kMelBins; ++m) {
        const double lo = bp[static_cast<std::size_t>(m)];
        const double mid = bp[static_cast<std::size_t>(m + 1)];
        const double hi = bp[static_cast<std::size_t>(m + 2)];
        const double norm = 2.0 / (hi - lo);  // unit-area triangles
        for (int k = 0; k < kFftBins; ++k) {
            const double f = k * bin_hz;
            double w = 0.0;
            if (f > lo && f < hi) w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
            fb.at(m, k) = static_cast<float>(w * norm);
        }
    }
    return fb;
}

MelSpec mel_project(const TensorF& magnitude) {
    ensure_shape(magnitude, {kFftBins, magnitude.dim(1)}, "mel_project input");
    ensure_finite(magnitude, "mel_project input");
    static const TensorF fb = mel_filterbank();
    const int frames = magnitude.dim(1);
    MelSpec spec;
    spec.values = TensorF({kMelBins, frames});
    for (int t = 0; t < frames; ++t)
        for (int m = 0; m < kMelBins; ++m) {
            double acc = 0.0;
            for (int k = 0; k < kFftBins; ++k) {
                const double v = static_cast<double>(magnitude.at(k, t));
                const double w = fb.at(m, k);
                if (w != 0.0) acc += w * v * v;
            }
            spec.values.at(m, t) = static_cast<float>(std::log(acc + 1e-10));
        }
    return spec;
}

MelSpec compute_melspec(const AudioClip& clip) { return mel_project(stft_magnitude(clip)); }

}  // namespace sedkit
