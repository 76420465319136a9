#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include "sedkit/events.hpp"
#include "sedkit/metrics.hpp"
#include "sedkit/synth.hpp"

using namespace sedkit;
namespace fs = std::filesystem;

TEST_CASE("synthetic corpus is bitwise deterministic per seed") {
    const auto a = synth_corpus(42, 4);
    const auto b = synth_corpus(42, 4);
    REQUIRE(a.size() == 4);
    REQUIRE(b.size() == 4);
    for (std::size_t c = 0; c < a.size(); ++c) {
        REQUIRE(a[c].audio.samples.size() == b[c].audio.samples.size());
        for (std::size_t i = 0; i < a[c].audio.samples.size(); ++i)
            CHECK(a[c].audio.samples[i] == b[c].audio.samples[i]);
        REQUIRE(a[c].labels.events.size() == b[c].labels.events.size());
        for (std::size_t i = 0; i < a[c].labels.events.size(); ++i) {
            CHECK(a[c].labels.events[i].class_id == b[c].labels.events[i].class_id);
            CHECK(a[c].labels.events[i].onset == b[c].labels.events[i].onset);
            CHECK(a[c].labels.events[i].offset == b[c].labels.events[i].offset);
        }
    }
    const auto other = synth_corpus(43, 4);
    bool differs = false;
    for (std::size_t i = 0; i < a[0].audio.samples.size(); ++i)
        if (a[0].audio.samples[i] != other[0].audio.samples[i]) differs = true;
    CHECK(differs);
}

TEST_CASE("synthetic clips are well-formed 10 s signals with aligned labels") {
    const auto corpus = synth_corpus(7, 6);
    int total_events = 0;
    for (const auto& clip : corpus) {
        CHECK(clip.audio.sample_rate == 16000);
        CHECK(clip.audio.samples.size() == 160000);
        float peak = 0.0f;
        for (float s : clip.audio.samples) {
            CHECK(std::abs(s) <= 1.0f);
            peak = std::max(peak, std::abs(s));
        }
        CHECK(peak > 0.01f);  // events are audible, not silence

        CHECK_NOTHROW(validate_events(clip.labels));
        CHECK(clip.labels.duration == doctest::Approx(10.0));
        CHECK(!clip.labels.events.empty());
        std::map<int, std::vector<std::pair<double, double>>> by_class;
        for (const auto& e : clip.labels.events) {
            ++total_events;
            CHECK(e.onset >= 0.0);
            CHECK(e.offset <= 10.0);
            CHECK(e.offset > e.onset);
            // 64 ms grid alignment
            const double on_frames = e.onset / kSynthFrameDur;
            const double off_frames = e.offset / kSynthFrameDur;
            CHECK(std::abs(on_frames - std::round(on_frames)) < 1e-9);
            CHECK(std::abs(off_frames - std::round(off_frames)) < 1e-9);
            // durations sized to survive a window-7 median filter
            const double dur = e.offset - e.onset;
            CHECK(dur >= 8 * kSynthFrameDur - 1e-9);
            CHECK(dur <= 39 * kSynthFrameDur + 1e-9);
            by_class[e.class_id].emplace_back(e.onset, e.offset);
        }
        for (auto& [k, spans] : by_class) {
            std::sort(spans.begin(), spans.end());
            for (std::size_t i = 1; i < spans.size(); ++i)
                CHECK(spans[i].first - spans[i - 1].second >= 8 * kSynthFrameDur - 1e-9);
        }
    }
    CHECK(total_events >= 6);
}

TEST_CASE("labels survive rasterization, median filtering, and decoding") {
    const auto corpus = synth_corpus(99, 5);
    std::vector<ClipEvents> ref, est;
    std::vector<std::pair<ClipEvents, TensorF>> dataset;
    for (const auto& clip : corpus) {
        ref.push_back(clip.labels);
        const TensorF grid = rasterize(clip.labels, kSynthFrames, kSynthFrameDur);
        const TensorF smooth = median_filter(grid, 7);
        est.push_back(decode_events(smooth, 0.5, kSynthFrameDur, clip.labels.clip_id, 10.0));
        dataset.emplace_back(clip.labels, grid);
    }
    const F1Result f1 = collar_f1(ref, est);
    CHECK(f1.macro == doctest::Approx(1.0));
    for (std::size_t k = 0; k < f1.per_class.size(); ++k) {
        CHECK(f1.fp[k] == 0);
        CHECK(f1.fn[k] == 0);
    }
    const PsdsResult p1 = psds(dataset, PsdsConfig::scenario1(), kSynthFrameDur);
    CHECK(p1.score == doctest::Approx(1.0).epsilon(1e-12));
    const PsdsResult p2 = psds(dataset, PsdsConfig::scenario2(), kSynthFrameDur);
    CHECK(p2.score == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("write_corpus lays out wav files and one event table") {
    const auto corpus = synth_corpus(3, 3);
    const std::string dir = "synth_out_test";
    fs::remove_all(dir);
    const std::string ref_path = write_corpus(dir, corpus);
    CHECK(fs::exists(ref_path));
    for (const auto& clip : corpus) {
        const fs::path wav = fs::path(dir) / (clip.labels.clip_id + ".wav");
        REQUIRE(fs::exists(wav));
        const AudioClip back = read_wav(wav.string());
        CHECK(back.samples.size() == 160000);
    }
    const auto table = read_events_tsv(ref_path);
    REQUIRE(table.size() == 3);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(table[c].clip_id == corpus[c].labels.clip_id);
        REQUIRE(table[c].events.size() == corpus[c].labels.events.size());
        for (std::size_t i = 0; i < table[c].events.size(); ++i) {
            CHECK(table[c].events[i].class_id == corpus[c].labels.events[i].class_id);
            // the table stores times with millisecond precision
            CHECK(table[c].events[i].onset ==
                  doctest::Approx(corpus[c].labels.events[i].onset).epsilon(1e-6));
            CHECK(table[c].events[i].offset ==
                  doctest::Approx(corpus[c].labels.events[i].offset).epsilon(1e-6));
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("corpus size must be positive") {
    CHECK_THROWS_AS(synth_corpus(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(synth_corpus(1, -2), std::invalid_argument);
}
