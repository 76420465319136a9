#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "oracles.hpp"
#include "sedkit/model.hpp"
#include "sedkit/rng.hpp"
#include "sedkit/tensor.hpp"
#include "sedkit/tnsr_io.hpp"

using namespace sedkit;
namespace fs = std::filesystem;

namespace {

// Small network with the same block structure: 64 mel bins collapse to 1
// through six pooling stages, time pools by 4 overall. The frequency extent
// entering every attention-carrying block stays even so reduction 2 applies.
ModelConfig tiny_config(AttentionVariant v) {
    ModelConfig cfg;
    cfg.channels = {4, 4, 4, 4, 4, 4, 4};
    cfg.pooling = {{2, 2}, {2, 2}, {2, 1}, {2, 1}, {2, 1}, {2, 1}, {1, 1}};
    cfg.mel_bins = 64;
    cfg.gru_hidden = 6;
    cfg.gru_layers = 2;
    cfg.n_classes = 3;
    cfg.reduction = 2;
    cfg.fdy_basis = 2;
    cfg.attention = v;
    cfg.validate();
    return cfg;
}

double max_abs_diff(const TensorF& a, const TensorF& b) {
    REQUIRE(a.same_shape(b));
    double m = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a.vec()[i]) - b.vec()[i]));
    return m;
}

}  // namespace

TEST_CASE("closed-form audit equals enumerated totals for all nine rows") {
    for (const auto& [name, cfg] : table_configs()) {
        const CostReport rep = param_audit(cfg);
        ModelParams mp = build(cfg, 17);
        INFO("row ", name);
        CHECK(rep.total == count_params(mp));
        long long component_sum = 0;
        for (const auto& c : rep.components) component_sum += c.count;
        CHECK(component_sum == rep.total);
    }
}

TEST_CASE("audit matches enumeration on small nonstandard configs too") {
    for (AttentionVariant v : {AttentionVariant::none, AttentionVariant::se,
                               AttentionVariant::tfwse, AttentionVariant::se_tfwse,
                               AttentionVariant::c2datt, AttentionVariant::fdy}) {
        const ModelConfig cfg = tiny_config(v);
        ModelParams mp = build(cfg, 5);
        INFO("variant ", variant_name(v));
        CHECK(param_audit(cfg).total == count_params(mp));
    }
}

TEST_CASE("forward emits per-frame and clip probabilities with the right shapes") {
    const ModelConfig cfg = tiny_config(AttentionVariant::se_tfwse);
    const ModelParams mp = build(cfg, 29);
    Rng rng(30);
    const TensorF mel = TensorF::random_uniform({2, 1, 64, 20}, rng, -1.0, 1.0);
    ForwardTrace trace;
    const ForwardResult fr = forward(mp, mel, &trace);
    REQUIRE(fr.strong.dims() == std::vector<int>{2, 5, 3});
    REQUIRE(fr.weak.dims() == std::vector<int>{2, 3});
    for (float v : fr.strong.vec()) {
        CHECK(v > 0.0f);
        CHECK(v < 1.0f);
    }
    // attention weights over time sum to 1, and the weak head is a convex
    // combination of the per-frame probabilities
    for (int b = 0; b < 2; ++b)
        for (int k = 0; k < 3; ++k) {
            double s = 0.0;
            float lo = 1.0f, hi = 0.0f;
            for (int t = 0; t < 5; ++t) {
                s += trace.weak_attn.at(b, t, k);
                lo = std::min(lo, fr.strong.at(b, t, k));
                hi = std::max(hi, fr.strong.at(b, t, k));
            }
            CHECK(std::abs(s - 1.0) < 1e-5);
            CHECK(fr.weak.at(b, k) >= lo - 1e-6f);
            CHECK(fr.weak.at(b, k) <= hi + 1e-6f);
        }
}

TEST_CASE("forward matches the straight-line network oracle for every variant") {
    Rng rng(31);
    for (AttentionVariant v :
         {AttentionVariant::none, AttentionVariant::se, AttentionVariant::tse,
          AttentionVariant::fwse, AttentionVariant::tfwse, AttentionVariant::se_tfwse,
          AttentionVariant::tfwse_se, AttentionVariant::c2datt, AttentionVariant::fdy}) {
        const ModelConfig cfg = tiny_config(v);
        const ModelParams mp = build(cfg, 100 + static_cast<int>(v));
        const TensorF mel = TensorF::random_uniform({1, 1, 64, 12}, rng, -1.0, 1.0);
        const ForwardResult got = forward(mp, mel);
        const ForwardResult want = oracle::crnn_forward(mp, mel);
        INFO("variant ", variant_name(v));
        CHECK(max_abs_diff(got.strong, want.strong) < 1e-4);
        CHECK(max_abs_diff(got.weak, want.weak) < 1e-4);
    }
}

TEST_CASE("build is deterministic per seed") {
    const ModelConfig cfg = tiny_config(AttentionVariant::fdy);
    ModelParams a = build(cfg, 77);
    ModelParams b = build(cfg, 77);
    ModelParams c = build(cfg, 78);
    const auto ra = tensor_registry(a), rb = tensor_registry(b), rc = tensor_registry(c);
    REQUIRE(ra.size() == rb.size());
    bool all_same = true, any_diff_seed = false;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        CHECK(ra[i].name == rb[i].name);
        for (std::size_t j = 0; j < ra[i].tensor->numel(); ++j) {
            all_same = all_same && ra[i].tensor->vec()[j] == rb[i].tensor->vec()[j];
            any_diff_seed = any_diff_seed || ra[i].tensor->vec()[j] != rc[i].tensor->vec()[j];
        }
    }
    CHECK(all_same);
    CHECK(any_diff_seed);
}

TEST_CASE("weights round-trip through save and load bitwise") {
    const fs::path dir = fs::temp_directory_path() / "sedkit_test_weights";
    fs::remove_all(dir);
    const ModelConfig cfg = tiny_config(AttentionVariant::se_tfwse);
    ModelParams a = build(cfg, 41);
    save_weights(a, dir.string());
    ModelParams b = build(cfg, 999);
    load_weights(b, dir.string());
    Rng rng(42);
    const TensorF mel = TensorF::random_uniform({1, 1, 64, 8}, rng, -1.0, 1.0);
    const ForwardResult fa = forward(a, mel);
    const ForwardResult fb = forward(b, mel);
    CHECK(max_abs_diff(fa.strong, fb.strong) == 0.0);
    CHECK(max_abs_diff(fa.weak, fb.weak) == 0.0);
}

TEST_CASE("load rejects missing tensors, shape mismatches, and unknown extras") {
    const fs::path dir = fs::temp_directory_path() / "sedkit_test_badload";
    fs::remove_all(dir);
    const ModelConfig cfg = tiny_config(AttentionVariant::none);
    ModelParams a = build(cfg, 1);
    save_weights(a, dir.string());

    SUBCASE("wrong architecture") {
        ModelParams b = build(tiny_config(AttentionVariant::se), 1);
        CHECK_THROWS(load_weights(b, dir.string()));
    }
    SUBCASE("missing entry") {
        auto entries = read_manifest((dir / "manifest.txt").string());
        entries.pop_back();
        write_manifest((dir / "manifest.txt").string(), entries);
        ModelParams b = build(cfg, 2);
        CHECK_THROWS(load_weights(b, dir.string()));
    }
    SUBCASE("unknown extra entry") {
        auto entries = read_manifest((dir / "manifest.txt").string());
        const TensorF stray({2, 2});
        write_tnsr((dir / "stray.tnsr").string(), stray);
        entries.push_back({"left.over", "stray.tnsr"});
        write_manifest((dir / "manifest.txt").string(), entries);
        ModelParams b = build(cfg, 2);
        CHECK_THROWS(load_weights(b, dir.string()));
    }
    SUBCASE("shape mismatch") {
        const auto entries = read_manifest((dir / "manifest.txt").string());
        const TensorF wrong({3, 3});
        write_tnsr((dir / entries[0].file).string(), wrong);
        ModelParams b = build(cfg, 2);
        CHECK_THROWS(load_weights(b, dir.string()));
    }
}

TEST_CASE("bidirectional recurrence matches the hand-unrolled oracle") {
    Rng rng(55);
    const int H = 5, D = 7, B = 2, T = 9;
    GruLayerParams layer;
    for (GruDirParams* dir : {&layer.fwd, &layer.bwd}) {
        dir->w_ih = TensorF::random_uniform({3 * H, D}, rng, -0.5, 0.5);
        dir->w_hh = TensorF::random_uniform({3 * H, H}, rng, -0.5, 0.5);
        dir->b_ih = TensorF::random_uniform({3 * H}, rng, -0.5, 0.5);
        dir->b_hh = TensorF::random_uniform({3 * H}, rng, -0.5, 0.5);
    }
    const TensorF seq = TensorF::random_uniform({B, T, D}, rng, -1.0, 1.0);
    CHECK(max_abs_diff(bigru_forward(layer, seq, H), oracle::bigru(layer, seq, H)) < 1e-5);
}

TEST_CASE("zero-weight recurrence outputs zeros and a single frame works") {
    const int H = 4, D = 3;
    GruLayerParams layer;
    for (GruDirParams* dir : {&layer.fwd, &layer.bwd}) {
        dir->w_ih = TensorF({3 * H, D});
        dir->w_hh = TensorF({3 * H, H});
        dir->b_ih = TensorF({3 * H});
        dir->b_hh = TensorF({3 * H});
    }
    Rng rng(56);
    const TensorF seq = TensorF::random_uniform({1, 6, D}, rng, -1.0, 1.0);
    const TensorF out = bigru_forward(layer, seq, H);
    for (float v : out.vec()) CHECK(v == 0.0f);  // n = tanh(0) = 0, z = 0.5, h stays 0
    const TensorF one = TensorF::random_uniform({1, 1, D}, rng, -1.0, 1.0);
    CHECK(bigru_forward(layer, one, H).dims() == std::vector<int>{1, 1, 2 * H});
}

TEST_CASE("zero-weight channel gate halves its input exactly") {
    Rng rng(57);
    const TensorF x = TensorF::random_uniform({1, 3, 4, 5}, rng, -1.0, 1.0);
    const TensorF w({3, 3});
    const TensorF b({3});
    const TensorF y = context_gate(x, w, b);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.vec()[i] == 0.5f * x.vec()[i]);
}

TEST_CASE("config text round-trips and rejects bad input") {
    ModelConfig cfg = tiny_config(AttentionVariant::tfwse_se);
    cfg.fdy_temperature = 0.75;
    const ModelConfig back = parse_config_text(config_to_text(cfg));
    CHECK(config_to_text(back) == config_to_text(cfg));

    CHECK_THROWS_AS((void)parse_config_text("nonsense=1\n"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_config_text("attention\n"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_config_text("attention=warp\n"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_config_text("pooling=2,2\n"), std::invalid_argument);
    // comments and blank lines are fine
    const ModelConfig ok = parse_config_text("# comment\n\nattention=se\n");
    CHECK(ok.attention == AttentionVariant::se);
}

TEST_CASE("config validation enforces structural invariants") {
    ModelConfig cfg;
    cfg.channels = {32, 64};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = ModelConfig{};
    cfg.pooling[0] = {3, 2};  // 3 does not divide 128 down to 1
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = ModelConfig{};
    cfg.dropout = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = ModelConfig{};
    cfg.attention = AttentionVariant::se;
    cfg.reduction = 3;  // does not divide the channel widths
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("frequency extents follow the pooling ladder") {
    const ModelConfig cfg;
    CHECK(cfg.freq_extents() == std::vector<int>{128, 64, 32, 16, 8, 4, 2});
}

TEST_CASE("variant names parse back to themselves") {
    for (const auto& [name, cfg] : table_configs()) {
        if (name == "baseline") continue;
        CHECK(variant_name(parse_variant(name)) == name);
    }
    CHECK_THROWS_AS((void)parse_variant("sparkle"), std::invalid_argument);
}
