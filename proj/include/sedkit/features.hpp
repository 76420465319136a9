#pragma once

#include <string>
#include <vector>

#include "sedkit/tensor.hpp"

namespace sedkit {

inline constexpr int kSampleRate = 16000;
inline constexpr int kNFft = 2048;
inline constexpr int kHopLength = 256;
inline constexpr int kFftBins = kNFft / 2 + 1;  // 1025
inline constexpr int kMelBins = 128;
inline constexpr double kFMin = 0.0;
inline constexpr double kFMax = 8000.0;

struct AudioClip {
    std::vector<float> samples;
    int sample_rate = kSampleRate;
};

// PCM WAV, 16-bit little-endian mono at 16 kHz; anything else is rejected.
AudioClip read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioClip& clip);

// Centered frames with reflect padding, periodic Hamming window of length
// 2048, magnitude of the 2048-point DFT. Output is [1025, T_frames] with
// T_frames = floor(len/256) + 1.
TensorF stft_magnitude(const AudioClip& clip);

int frame_count(std::size_t n_samples);

struct MelSpec {
    TensorF values;  // [128, T_frames], log energy
    int frame_hop = kHopLength;
};

// Triangular area-normalized filterbank rows over [0, 8000] Hz; [128, 1025].
TensorF mel_filterbank();

// Power-spectrum projection through the filterbank, then log(x + 1e-10).
MelSpec mel_project(const TensorF& magnitude);

MelSpec compute_melspec(const AudioClip& clip);

// Frequencies (Hz) of the filterbank breakpoints, 130 values; filter i peaks
// at entry i+1. Exposed so tests can probe center-frequency response.
std::vector<double> mel_breakpoints_hz();

}  // namespace sedkit
