#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "sedkit/augment.hpp"
#include "sedkit/model.hpp"
#include "sedkit/rng.hpp"
#include "sedkit/tensor.hpp"

using namespace sedkit;

namespace {

TensorF randu(Rng& rng, std::vector<int> dims, float lo = 0.0f, float hi = 1.0f) {
    return TensorF::random_uniform(std::move(dims), rng, lo, hi);
}

}  // namespace

TEST_CASE("mixup is the stated convex combination") {
    Rng rng(31);
    const TensorF x1 = randu(rng, {2, 4, 6});
    const TensorF x2 = randu(rng, {2, 4, 6});
    const TensorF y1 = randu(rng, {2, 3});
    const TensorF y2 = randu(rng, {2, 3});

    const double lam = 0.37;
    const auto [mx, my] = mixup(x1, x2, y1, y2, lam);
    REQUIRE(mx.dims() == x1.dims());
    REQUIRE(my.dims() == y1.dims());
    for (std::size_t i = 0; i < mx.numel(); ++i) {
        const double want = lam * x1.data()[i] + (1.0 - lam) * x2.data()[i];
        CHECK(mx.data()[i] == doctest::Approx(want).epsilon(1e-6));
    }
    for (std::size_t i = 0; i < my.numel(); ++i) {
        const double want = lam * y1.data()[i] + (1.0 - lam) * y2.data()[i];
        CHECK(my.data()[i] == doctest::Approx(want).epsilon(1e-6));
    }

    SUBCASE("lambda 1 returns the first pair, lambda 0 the second") {
        const auto [ax, ay] = mixup(x1, x2, y1, y2, 1.0);
        for (std::size_t i = 0; i < ax.numel(); ++i) CHECK(ax.data()[i] == x1.data()[i]);
        for (std::size_t i = 0; i < ay.numel(); ++i) CHECK(ay.data()[i] == y1.data()[i]);
        const auto [bx, by] = mixup(x1, x2, y1, y2, 0.0);
        for (std::size_t i = 0; i < bx.numel(); ++i) CHECK(bx.data()[i] == x2.data()[i]);
        for (std::size_t i = 0; i < by.numel(); ++i) CHECK(by.data()[i] == y2.data()[i]);
    }
    SUBCASE("shape mismatches are rejected") {
        const TensorF bad = randu(rng, {2, 4, 5});
        CHECK_THROWS_AS(mixup(x1, bad, y1, y2, 0.5), std::invalid_argument);
        const TensorF bady = randu(rng, {2, 4});
        CHECK_THROWS_AS(mixup(x1, x2, y1, bady, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(mixup(x1, x2, y1, y2, 1.5), std::invalid_argument);
        CHECK_THROWS_AS(mixup(x1, x2, y1, y2, -0.1), std::invalid_argument);
    }
}

TEST_CASE("mixup lambda draws stay in the unit interval") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double lam = draw_mixup_lambda(rng, 0.2);
        CHECK(lam >= 0.0);
        CHECK(lam <= 1.0);
    }
    CHECK_THROWS_AS(draw_mixup_lambda(rng, 0.0), std::invalid_argument);
}

TEST_CASE("time mask replaces one span with the tensor mean") {
    Rng rng(67);
    const TensorF x = randu(rng, {8, 20}, -1.0f, 3.0f);
    double mean = 0.0;
    for (std::size_t i = 0; i < x.numel(); ++i) mean += x.data()[i];
    mean /= static_cast<double>(x.numel());

    AugmentConfig cfg;
    cfg.time_mask_max_width = 8;
    const TensorF masked = time_mask(x, 99, cfg);
    REQUIRE(masked.dims() == x.dims());

    // Each time column is either untouched or fully set to the mean, and the
    // masked columns form one contiguous run.
    std::vector<int> column_state(20, 0);
    for (std::size_t t = 0; t < 20; ++t) {
        bool all_orig = true;
        bool all_mean = true;
        for (std::size_t f = 0; f < 8; ++f) {
            if (masked.at(f, t) != x.at(f, t)) all_orig = false;
            if (std::abs(masked.at(f, t) - mean) > 1e-5) all_mean = false;
        }
        CHECK((all_orig || all_mean));
        column_state[t] = all_orig ? 0 : 1;
    }
    int transitions = 0;
    for (std::size_t t = 1; t < 20; ++t)
        if (column_state[t] != column_state[t - 1]) ++transitions;
    CHECK(transitions <= 2);
    const int masked_cols =
        static_cast<int>(std::count(column_state.begin(), column_state.end(), 1));
    CHECK(masked_cols <= cfg.time_mask_max_width);

    SUBCASE("deterministic per seed") {
        const TensorF again = time_mask(x, 99, cfg);
        for (std::size_t i = 0; i < x.numel(); ++i)
            CHECK(again.data()[i] == masked.data()[i]);
    }
    SUBCASE("zero max width is the identity") {
        AugmentConfig none = cfg;
        none.time_mask_max_width = 0;
        const TensorF same = time_mask(x, 99, none);
        for (std::size_t i = 0; i < x.numel(); ++i) CHECK(same.data()[i] == x.data()[i]);
    }
}

TEST_CASE("filter augment applies a bounded per-frequency gain") {
    Rng rng(54);
    const TensorF x = randu(rng, {2, 16, 12}, 0.5f, 2.0f);
    AugmentConfig cfg;
    const TensorF out = filter_augment(x, 1234, cfg);
    REQUIRE(out.dims() == x.dims());

    const double gain_lo = std::pow(10.0, cfg.filter_db_min / 20.0);
    const double gain_hi = std::pow(10.0, cfg.filter_db_max / 20.0);
    for (std::size_t b = 0; b < 2; ++b) {
        for (std::size_t f = 0; f < 16; ++f) {
            // One gain per frequency row: the ratio must be constant over
            // time and inside the configured dB range.
            const double ratio0 = out.at(b, f, std::size_t{0}) / x.at(b, f, std::size_t{0});
            CHECK(ratio0 >= gain_lo - 1e-6);
            CHECK(ratio0 <= gain_hi + 1e-6);
            for (std::size_t t = 1; t < 12; ++t) {
                const double ratio = out.at(b, f, t) / x.at(b, f, t);
                CHECK(ratio == doctest::Approx(ratio0).epsilon(1e-5));
            }
        }
    }

    SUBCASE("deterministic per seed, different across seeds") {
        const TensorF again = filter_augment(x, 1234, cfg);
        bool same = true;
        for (std::size_t i = 0; i < x.numel(); ++i)
            if (again.data()[i] != out.data()[i]) same = false;
        CHECK(same);
        const TensorF other = filter_augment(x, 1235, cfg);
        bool differs = false;
        for (std::size_t i = 0; i < x.numel(); ++i)
            if (other.data()[i] != out.data()[i]) differs = true;
        CHECK(differs);
    }
}

TEST_CASE("augment config validation") {
    AugmentConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    SUBCASE("band range") {
        cfg.filter_bands_min = 0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("band order") {
        cfg.filter_bands_min = 6;
        cfg.filter_bands_max = 3;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("db order") {
        cfg.filter_db_min = 3.0;
        cfg.filter_db_max = -3.0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("ema decay") {
        cfg.ema_decay = 1.5;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("negative mask width") {
        cfg.time_mask_max_width = -1;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
}

TEST_CASE("frame shift rolls features and labels together") {
    Rng rng(8);
    const TensorF x = randu(rng, {3, 5, 10});  // time on the trailing axis
    const TensorF y = randu(rng, {10, 4});     // time on the leading axis

    const auto [xs, ys] = frame_shift(x, y, 3);
    REQUIRE(xs.dims() == x.dims());
    REQUIRE(ys.dims() == y.dims());
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t f = 0; f < 5; ++f)
            for (std::size_t t = 0; t < 10; ++t)
                CHECK(xs.at(c, f, (t + 3) % 10) == x.at(c, f, t));
    for (std::size_t t = 0; t < 10; ++t)
        for (std::size_t k = 0; k < 4; ++k)
            CHECK(ys.at((t + 3) % 10, k) == y.at(t, k));

    SUBCASE("shift and unshift is the identity") {
        const auto [xb, yb] = frame_shift(xs, ys, -3);
        for (std::size_t i = 0; i < x.numel(); ++i) CHECK(xb.data()[i] == x.data()[i]);
        for (std::size_t i = 0; i < y.numel(); ++i) CHECK(yb.data()[i] == y.data()[i]);
    }
    SUBCASE("shifts reduce modulo the time extent") {
        const auto [xc, yc] = frame_shift(x, y, 13);
        for (std::size_t i = 0; i < x.numel(); ++i) CHECK(xc.data()[i] == xs.data()[i]);
        for (std::size_t i = 0; i < y.numel(); ++i) CHECK(yc.data()[i] == ys.data()[i]);
        const auto [xz, yz] = frame_shift(x, y, -10);
        for (std::size_t i = 0; i < x.numel(); ++i) CHECK(xz.data()[i] == x.data()[i]);
        for (std::size_t i = 0; i < y.numel(); ++i) CHECK(yz.data()[i] == y.data()[i]);
    }
    SUBCASE("time extents must agree") {
        const TensorF bad = randu(rng, {9, 4});
        CHECK_THROWS_AS(frame_shift(x, bad, 1), std::invalid_argument);
    }
}

TEST_CASE("frame shift draws respect the configured range") {
    Rng rng(3);
    AugmentConfig cfg;
    cfg.frame_shift_max = 5;
    for (int i = 0; i < 100; ++i) {
        const int s = draw_frame_shift(rng, cfg);
        CHECK(s >= -5);
        CHECK(s <= 5);
    }
}

TEST_CASE("ema update blends teacher toward student") {
    Rng rng(21);
    TensorF teacher = randu(rng, {4, 3});
    const TensorF before = teacher;
    const TensorF student = randu(rng, {4, 3});

    SUBCASE("interior alpha") {
        ema_update(teacher, student, 0.9);
        for (std::size_t i = 0; i < teacher.numel(); ++i) {
            const double want = 0.9 * before.data()[i] + 0.1 * student.data()[i];
            CHECK(teacher.data()[i] == doctest::Approx(want).epsilon(1e-6));
        }
    }
    SUBCASE("alpha 1 freezes the teacher") {
        ema_update(teacher, student, 1.0);
        for (std::size_t i = 0; i < teacher.numel(); ++i)
            CHECK(teacher.data()[i] == before.data()[i]);
    }
    SUBCASE("alpha 0 copies the student") {
        ema_update(teacher, student, 0.0);
        for (std::size_t i = 0; i < teacher.numel(); ++i)
            CHECK(teacher.data()[i] == doctest::Approx(student.data()[i]).epsilon(1e-7));
    }
    SUBCASE("shape mismatch and bad alpha are rejected") {
        TensorF small = randu(rng, {4, 2});
        CHECK_THROWS_AS(ema_update(small, student, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(ema_update(teacher, student, -0.1), std::invalid_argument);
        CHECK_THROWS_AS(ema_update(teacher, student, 1.1), std::invalid_argument);
    }
}

TEST_CASE("ema update walks every model parameter") {
    ModelConfig cfg;
    cfg.attention = AttentionVariant::se;
    ModelParams teacher = build(cfg, 11);
    ModelParams student = build(cfg, 22);
    ModelParams before = teacher;

    ema_update(teacher, student, 0.75);
    const auto t_after = tensor_registry(teacher);
    const auto t_before = tensor_registry(before);
    const auto s_tensors = tensor_registry(student);
    REQUIRE(t_after.size() == t_before.size());
    for (std::size_t i = 0; i < t_after.size(); ++i) {
        const TensorF& a = *t_after[i].tensor;
        const TensorF& b = *t_before[i].tensor;
        const TensorF& s = *s_tensors[i].tensor;
        REQUIRE(a.numel() == b.numel());
        for (std::size_t j = 0; j < a.numel(); j += 31) {
            const double want = 0.75 * b.data()[j] + 0.25 * s.data()[j];
            CHECK(a.data()[j] == doctest::Approx(want).epsilon(1e-5));
        }
    }
}
