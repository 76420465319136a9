#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "sedkit/attention.hpp"
#include "sedkit/nn.hpp"
#include "sedkit/rng.hpp"
#include "sedkit/tensor.hpp"

using namespace sedkit;

namespace {

double max_abs_diff(const TensorF& a, const TensorF& b) {
    REQUIRE(a.same_shape(b));
    double m = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a.vec()[i]) - b.vec()[i]));
    return m;
}

bool bitwise_equal(const TensorF& a, const TensorF& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.numel(); ++i)
        if (a.vec()[i] != b.vec()[i]) return false;
    return true;
}

}  // namespace

TEST_CASE("scale variants match their straight-loop oracles on small instances") {
    Rng rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        const int B = 1 + static_cast<int>(rng.uniform_int(2));
        const int gated = 2 * (1 + static_cast<int>(rng.uniform_int(4)));  // <= 8
        const int other = 2 + static_cast<int>(rng.uniform_int(7));        // <= 8
        const int T = 2 + static_cast<int>(rng.uniform_int(7));
        const auto p = SqueezeExciteParams<float>::init(gated, 2, rng);

        const TensorF xc = TensorF::random_uniform({B, gated, other, T}, rng, -1.0, 1.0);
        CHECK(max_abs_diff(se_forward(xc, p), oracle::se(xc, p)) < 1e-6);
        CHECK(max_abs_diff(tse_forward(xc, p), oracle::tse(xc, p)) < 1e-6);

        const TensorF xf = TensorF::random_uniform({B, other, gated, T}, rng, -1.0, 1.0);
        CHECK(max_abs_diff(fwse_forward(xf, p), oracle::fwse(xf, p)) < 1e-6);
        CHECK(max_abs_diff(tfwse_forward(xf, p), oracle::tfwse(xf, p)) < 1e-6);
    }
}

TEST_CASE("joint channel-frequency attention matches its oracle") {
    Rng rng(405);
    for (int trial = 0; trial < 8; ++trial) {
        const int B = 1 + static_cast<int>(rng.uniform_int(2));
        const int C = 3 + static_cast<int>(rng.uniform_int(6));
        const int F = 3 + static_cast<int>(rng.uniform_int(6));
        const int T = 2 + static_cast<int>(rng.uniform_int(4));
        const auto p = C2dAttParams<float>::init(8, 3, rng);
        const TensorF x = TensorF::random_uniform({B, C, F, T}, rng, -1.0, 1.0);
        CHECK(max_abs_diff(c2datt_forward(x, p), oracle::c2datt(x, p)) < 1e-5);
    }
}

TEST_CASE("frequency-adaptive convolution matches its kernel-assembly oracle") {
    Rng rng(406);
    for (int trial = 0; trial < 8; ++trial) {
        const int B = 1 + static_cast<int>(rng.uniform_int(2));
        const int cin = 1 + static_cast<int>(rng.uniform_int(3));
        const int cout = 1 + static_cast<int>(rng.uniform_int(3));
        const int F = 3 + static_cast<int>(rng.uniform_int(6));
        const int T = 3 + static_cast<int>(rng.uniform_int(5));
        const int K = 1 + static_cast<int>(rng.uniform_int(4));
        const auto p = FdyConvParams<float>::init(conv3x3_same(cin, cout), K, 1.0, rng);
        const TensorF x = TensorF::random_uniform({B, cin, F, T}, rng, -1.0, 1.0);
        CHECK(max_abs_diff(fdy_forward(x, p), oracle::fdy(x, p)) < 1e-5);
    }
}

TEST_CASE("zero excitation weights scale every variant's input by exactly one half") {
    Rng rng(407);
    const TensorF x = TensorF::random_uniform({2, 4, 6, 5}, rng, -2.0, 2.0);
    TensorF half(x.dims());
    for (std::size_t i = 0; i < x.numel(); ++i) half.vec()[i] = 0.5f * x.vec()[i];

    auto pc = SqueezeExciteParams<float>::init(4, 2, rng);
    pc.w1.fill(0.0f);
    pc.w2.fill(0.0f);
    CHECK(bitwise_equal(se_forward(x, pc), half));
    CHECK(bitwise_equal(tse_forward(x, pc), half));

    auto pf = SqueezeExciteParams<float>::init(6, 2, rng);
    pf.w1.fill(0.0f);
    pf.w2.fill(0.0f);
    CHECK(bitwise_equal(fwse_forward(x, pf), half));
    CHECK(bitwise_equal(tfwse_forward(x, pf), half));

    auto pj = C2dAttParams<float>::init(8, 3, rng);
    pj.conv1_w.fill(0.0f);
    pj.conv1_b.fill(0.0f);
    pj.conv2_w.fill(0.0f);
    pj.conv2_b.fill(0.0f);
    CHECK(bitwise_equal(c2datt_forward(x, pj), half));

    // zero weights only in the second stage suffice: sigmoid(0) must be 0.5
    auto ph = SqueezeExciteParams<float>::init(4, 2, rng);
    ph.w2.fill(0.0f);
    CHECK(bitwise_equal(se_forward(x, ph), half));
}

TEST_CASE("per-frame variants collapse to their clip-level forms on time-constant input") {
    Rng rng(408);
    const int B = 2, C = 4, F = 6, T = 5;
    TensorF x({B, C, F, T});
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f) {
                const float v = static_cast<float>(rng.uniform(-1.0, 1.0));
                for (int t = 0; t < T; ++t) x.at(b, c, f, t) = v;
            }
    const auto pc = SqueezeExciteParams<float>::init(C, 2, rng);
    CHECK(max_abs_diff(tse_forward(x, pc), se_forward(x, pc)) == 0.0);
    const auto pf = SqueezeExciteParams<float>::init(F, 2, rng);
    CHECK(max_abs_diff(tfwse_forward(x, pf), fwse_forward(x, pf)) == 0.0);
}

TEST_CASE("single-basis adaptive convolution is bitwise the plain convolution") {
    Rng rng(409);
    for (int trial = 0; trial < 5; ++trial) {
        const int cin = 1 + static_cast<int>(rng.uniform_int(3));
        const int cout = 1 + static_cast<int>(rng.uniform_int(3));
        const auto p = FdyConvParams<float>::init(conv3x3_same(cin, cout), 1, 1.0, rng);
        const TensorF x = TensorF::random_uniform({2, cin, 7, 6}, rng, -1.0, 1.0);
        const TensorF plain = conv2d(x, p.basis_w[0], &p.basis_b[0], p.spec);
        CHECK(bitwise_equal(fdy_forward(x, p), plain));
    }
}

TEST_CASE("single-basis adaptive convolution backward reduces to the plain conv backward") {
    Rng rng(410);
    const auto p = FdyConvParams<float>::init(conv3x3_same(2, 3), 1, 1.0, rng);
    const TensorF x = TensorF::random_uniform({1, 2, 5, 4}, rng, -1.0, 1.0);
    const TensorF gy = TensorF::random_uniform({1, 3, 5, 4}, rng, -1.0, 1.0);
    const FdyGrads<float> g = fdy_backward(x, p, gy);
    const ConvGrads<float> c = conv2d_backward(x, p.basis_w[0], p.spec, gy);
    CHECK(bitwise_equal(g.gx, c.gx));
    CHECK(bitwise_equal(g.gbasis_w[0], c.gw));
    CHECK(bitwise_equal(g.gbasis_b[0], c.gb));
    for (float v : g.gattn_w.vec()) CHECK(v == 0.0f);
    for (float v : g.gattn_b.vec()) CHECK(v == 0.0f);
}

TEST_CASE("basis mixture weights sum to one at every frequency") {
    Rng rng(411);
    for (double tau : {0.25, 1.0, 3.0}) {
        const auto p = FdyConvParams<float>::init(conv3x3_same(3, 2), 4, tau, rng);
        const TensorF x = TensorF::random_uniform({2, 3, 9, 5}, rng, -3.0, 3.0);
        TensorF pi;
        (void)fdy_forward(x, p, &pi);
        REQUIRE(pi.dims() == std::vector<int>{2, 4, 9});
        for (int b = 0; b < 2; ++b)
            for (int f = 0; f < 9; ++f) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) s += pi.at(b, k, f);
                CHECK(std::abs(s - 1.0) < 1e-6);
            }
    }
}

TEST_CASE("attention scales stay strictly inside (0,1)") {
    Rng rng(412);
    // huge weights drive the excitation toward the sigmoid limits
    auto p = SqueezeExciteParams<float>::init(4, 2, rng);
    for (float& v : p.w1.vec()) v *= 1000.0f;
    for (float& v : p.w2.vec()) v *= 1000.0f;
    TensorF x({1, 4, 3, 3});
    x.fill(1.0f);
    const TensorF y = se_forward(x, p);
    for (std::size_t i = 0; i < y.numel(); ++i) {
        CHECK(y.vec()[i] > 0.0f);
        CHECK(y.vec()[i] < 1.0f);  // scale < 1 strictly, input is 1.0
    }
}

TEST_CASE("chaining scale modules is order sensitive") {
    Rng rng(413);
    const int C = 4, F = 6;
    std::vector<AttentionModule<float>> se_first(2), tfwse_first(2);
    se_first[0].kind = AttentionKind::se;
    se_first[0].se = SqueezeExciteParams<float>::init(C, 2, rng);
    se_first[1].kind = AttentionKind::tfwse;
    se_first[1].se = SqueezeExciteParams<float>::init(F, 2, rng);
    tfwse_first[0] = se_first[1];
    tfwse_first[1] = se_first[0];
    const TensorF x = TensorF::random_uniform({1, C, F, 5}, rng, -1.0, 1.0);
    const TensorF a = chain(se_first, x);
    const TensorF b = chain(tfwse_first, x);
    CHECK(max_abs_diff(a, b) > 1e-6);
}

TEST_CASE("squeeze-excite rejects mismatched shapes and bad reductions") {
    Rng rng(414);
    CHECK_THROWS_AS((void)SqueezeExciteParams<float>::init(6, 4, rng), std::invalid_argument);
    const auto p = SqueezeExciteParams<float>::init(4, 2, rng);
    const TensorF wrong({1, 5, 3, 3});
    CHECK_THROWS_AS((void)se_forward(wrong, p), std::invalid_argument);
    const TensorF three({4, 3, 3});
    CHECK_THROWS_AS((void)se_forward(three, p), std::invalid_argument);
}

TEST_CASE("parameter count closed forms match allocated tensors") {
    Rng rng(415);
    const auto pc = SqueezeExciteParams<float>::init(64, 4, rng);
    CHECK(pc.param_count() == se_param_count(64, 4));
    CHECK(se_param_count(64, 4) == 2LL * 64 * 16);
    const auto pj = C2dAttParams<float>::init(8, 3, rng);
    CHECK(pj.param_count() == c2datt_param_count(8, 3));
    CHECK(c2datt_param_count(8, 3) == 153);
    const auto pf = FdyConvParams<float>::init(conv3x3_same(16, 32), 4, 1.0, rng);
    long long manual = 0;
    for (const auto& w : pf.basis_w) manual += static_cast<long long>(w.numel());
    for (const auto& b : pf.basis_b) manual += static_cast<long long>(b.numel());
    manual += static_cast<long long>(pf.attn_w.numel()) + static_cast<long long>(pf.attn_b.numel());
    CHECK(pf.param_count() == manual);
}

TEST_CASE("batch entries are independent for every variant") {
    Rng rng(416);
    const auto pc = SqueezeExciteParams<float>::init(4, 2, rng);
    const auto pf = SqueezeExciteParams<float>::init(6, 2, rng);
    const auto pj = C2dAttParams<float>::init(8, 3, rng);
    const auto pd = FdyConvParams<float>::init(conv3x3_same(4, 2), 3, 1.0, rng);
    const TensorF x = TensorF::random_uniform({2, 4, 6, 5}, rng, -1.0, 1.0);
    // swap the two batch entries; outputs must swap identically
    TensorF xs(x.dims());
    const std::size_t half = x.numel() / 2;
    for (std::size_t i = 0; i < half; ++i) {
        xs.vec()[i] = x.vec()[half + i];
        xs.vec()[half + i] = x.vec()[i];
    }
    const auto check_swap = [&](const TensorF& y, const TensorF& ys) {
        REQUIRE(y.dims() == ys.dims());
        REQUIRE(y.dims()[0] == 2);
        const std::size_t h = y.numel() / 2;  // elements per batch entry
        for (std::size_t i = 0; i < h; ++i) {
            CHECK(y.vec()[i] == ys.vec()[h + i]);
            CHECK(y.vec()[h + i] == ys.vec()[i]);
        }
    };
    check_swap(se_forward(x, pc), se_forward(xs, pc));
    check_swap(tfwse_forward(x, pf), tfwse_forward(xs, pf));
    check_swap(c2datt_forward(x, pj), c2datt_forward(xs, pj));
    check_swap(fdy_forward(x, pd), fdy_forward(xs, pd));
}
