#include "sedkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <stdexcept>

#include "sedkit/rng.hpp"

namespace fs = std::filesystem;

namespace sedkit {

namespace {

// Classes 0..6 are tones at distinct frequencies; 7..9 are noise bursts.
constexpr double kToneHz[7] = {440.0, 620.0, 880.0, 1240.0, 1760.0, 2480.0, 3520.0};

void render_event(AudioClip& audio, const Event& e, Rng& rng) {
    const int s0 = static_cast<int>(std::lround(e.onset * kSampleRate));
    const int s1 = static_cast<int>(std::lround(e.offset * kSampleRate));
    const int fade = kSampleRate / 100;  // 10 ms ramps against clicks
    for (int s = s0; s < s1 && s < static_cast<int>(audio.samples.size()); ++s) {
        double v;
        if (e.class_id < 7) {
            v = 0.25 * std::sin(2.0 * std::numbers::pi * kToneHz[e.class_id] * s / kSampleRate);
        } else {
            v = (0.10 + 0.05 * (e.class_id - 7)) * rng.uniform(-1.0, 1.0);
        }
        const int into = s - s0, left = s1 - s;
        if (into < fade) v *= static_cast<double>(into) / fade;
        if (left < fade) v *= static_cast<double>(left) / fade;
        audio.samples[static_cast<std::size_t>(s)] += static_cast<float>(v);
    }
}

}  // namespace

std::vector<SynthClip> synth_corpus(std::uint64_t seed, int n_clips) {
    if (n_clips < 1) throw std::invalid_argument("synth_corpus: n_clips must be >= 1");
    Rng rng(seed);
    std::vector<SynthClip> corpus;
    corpus.reserve(static_cast<std::size_t>(n_clips));
    const int min_frames = 8, max_frames = 39;  // 0.512 .. 2.496 s
    const int gap_frames = 8;
    for (int c = 0; c < n_clips; ++c) {
        SynthClip clip;
        char name[32];
        std::snprintf(name, sizeof(name), "clip_%03d", c);
        clip.labels.clip_id = name;
        clip.labels.duration = 10.0;
        clip.audio.samples.assign(10 * kSampleRate, 0.0f);
        for (auto& s : clip.audio.samples) s = static_cast<float>(0.005 * rng.uniform(-1.0, 1.0));

        const int n_events = 1 + rng.uniform_int(3);
        for (int ei = 0; ei < n_events; ++ei) {
            for (int attempt = 0; attempt < 20; ++attempt) {
                const int cls = rng.uniform_int(kNumClasses);
                const int dur = min_frames + rng.uniform_int(max_frames - min_frames + 1);
                const int onset = rng.uniform_int(kSynthFrames - dur + 1);
                bool clash = false;
                for (const auto& prev : clip.labels.events) {
                    if (prev.class_id != cls) continue;
                    const int p0 = static_cast<int>(std::lround(prev.onset / kSynthFrameDur));
                    const int p1 = static_cast<int>(std::lround(prev.offset / kSynthFrameDur));
                    if (onset < p1 + gap_frames && p0 < onset + dur + gap_frames) {
                        clash = true;
                        break;
                    }
                }
                if (clash) continue;
                Event e;
                e.class_id = cls;
                e.onset = onset * kSynthFrameDur;
                e.offset = (onset + dur) * kSynthFrameDur;
                render_event(clip.audio, e, rng);
                clip.labels.events.push_back(e);
                break;
            }
        }
        std::sort(clip.labels.events.begin(), clip.labels.events.end(),
                  [](const Event& a, const Event& b) {
                      return a.onset != b.onset ? a.onset < b.onset : a.class_id < b.class_id;
                  });
        validate_events(clip.labels);
        corpus.push_back(std::move(clip));
    }
    return corpus;
}

std::string write_corpus(const std::string& dir, const std::vector<SynthClip>& corpus) {
    fs::create_directories(dir);
    std::vector<ClipEvents> all_labels;
    for (const auto& clip : corpus) {
        write_wav((fs::path(dir) / (clip.labels.clip_id + ".wav")).string(), clip.audio);
        all_labels.push_back(clip.labels);
    }
    const std::string events_path = (fs::path(dir) / "events.tsv").string();
    write_events_tsv(events_path, all_labels);
    return events_path;
}

}  // namespace sedkit
