#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sedkit/events.hpp"
#include "sedkit/features.hpp"

namespace sedkit {

// Synthetic 10 s clips: per-class tone bursts or noise segments over a quiet
// noise floor, with exact labels. Events snap to the 64 ms model frame grid
// (durations 0.512..2.496 s), and same-class events keep >= 0.512 s gaps, so
// indicator labels survive frame rasterization, window-7 median filtering,
// and event decoding without boundary drift.
struct SynthClip {
    AudioClip audio;
    ClipEvents labels;
};

inline constexpr double kSynthFrameDur = 0.064;  // 1024 samples at 16 kHz
inline constexpr int kSynthFrames = 156;         // frames per 10 s clip after pooling

std::vector<SynthClip> synth_corpus(std::uint64_t seed, int n_clips);

// Writes clip_NNN.wav per clip plus events.tsv; returns the event file path.
std::string write_corpus(const std::string& dir, const std::vector<SynthClip>& corpus);

}  // namespace sedkit
