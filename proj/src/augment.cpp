#include "sedkit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sedkit {

void AugmentConfig::validate() const {
    if (mixup_beta <= 0.0) throw std::invalid_argument("AugmentConfig: mixup_beta must be > 0");
    if (time_mask_max_width < 0)
        throw std::invalid_argument("AugmentConfig: time_mask_max_width must be >= 0");
    if (filter_bands_min < 2)
        throw std::invalid_argument("AugmentConfig: need at least 2 filter bands");
    if (filter_bands_max < filter_bands_min)
        throw std::invalid_argument("AugmentConfig: filter band range inverted");
    if (!std::isfinite(filter_db_min) || !std::isfinite(filter_db_max))
        throw std::invalid_argument("AugmentConfig: gain range must be finite");
    if (filter_db_max < filter_db_min)
        throw std::invalid_argument("AugmentConfig: gain range inverted");
    if (frame_shift_max < 0) throw std::invalid_argument("AugmentConfig: frame_shift_max must be >= 0");
    if (ema_decay < 0.0 || ema_decay > 1.0)
        throw std::invalid_argument("AugmentConfig: ema_decay must be in [0,1]");
}

std::pair<TensorF, TensorF> mixup(const TensorF& x1, const TensorF& x2, const TensorF& y1,
                                  const TensorF& y2, double lambda) {
    if (!x1.same_shape(x2)) throw std::invalid_argument("mixup: feature shape mismatch");
    if (!y1.same_shape(y2)) throw std::invalid_argument("mixup: label shape mismatch");
    if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("mixup: lambda must be in [0,1]");
    const float l = static_cast<float>(lambda);
    TensorF x(x1.dims()), y(y1.dims());
    for (std::size_t i = 0; i < x.numel(); ++i) x[i] = l * x1[i] + (1.0f - l) * x2[i];
    for (std::size_t i = 0; i < y.numel(); ++i) y[i] = l * y1[i] + (1.0f - l) * y2[i];
    return {std::move(x), std::move(y)};
}

double draw_mixup_lambda(Rng& rng, double beta) {
    if (beta <= 0.0) throw std::invalid_argument("draw_mixup_lambda: beta must be > 0");
    return rng.beta(beta, beta);
}

TensorF time_mask(const TensorF& x, std::uint64_t seed, const AugmentConfig& cfg) {
    cfg.validate();
    if (x.ndim() < 1) throw std::invalid_argument("time_mask: need at least 1 axis");
    const int t_len = x.dim(x.ndim() - 1);
    Rng rng(seed);
    const int max_w = std::min(cfg.time_mask_max_width, t_len);
    const int w = rng.uniform_int(max_w + 1);
    if (w == 0) return x;
    const int t0 = rng.uniform_int(t_len - w + 1);
    double mean = 0.0;
    for (std::size_t i = 0; i < x.numel(); ++i) mean += static_cast<double>(x[i]);
    const float fill = static_cast<float>(mean / static_cast<double>(x.numel()));
    TensorF y = x;
    const std::size_t rows = x.numel() / static_cast<std::size_t>(t_len);
    for (std::size_t r = 0; r < rows; ++r) {
        float* row = y.data() + r * static_cast<std::size_t>(t_len);
        for (int t = t0; t < t0 + w; ++t) row[t] = fill;
    }
    return y;
}

TensorF filter_augment(const TensorF& x, std::uint64_t seed, const AugmentConfig& cfg) {
    cfg.validate();
    if (cfg.filter_db_min > cfg.filter_db_max)
        throw std::invalid_argument("filter_augment: gain range inverted");
    if (x.ndim() < 2) throw std::invalid_argument("filter_augment: need at least 2 axes");
    const int f_len = x.dim(x.ndim() - 2);
    const int t_len = x.dim(x.ndim() - 1);
    Rng rng(seed);

    int n_bands = cfg.filter_bands_min + rng.uniform_int(cfg.filter_bands_max - cfg.filter_bands_min + 1);
    n_bands = std::min(n_bands, f_len);

    // Distinct interior boundaries, sorted; band i spans [bounds[i], bounds[i+1]).
    std::vector<int> interior(static_cast<std::size_t>(std::max(0, f_len - 1)));
    for (int i = 0; i < f_len - 1; ++i) interior[static_cast<std::size_t>(i)] = i + 1;
    for (int i = 0; i < n_bands - 1; ++i) {
        const int j = i + rng.uniform_int(static_cast<int>(interior.size()) - i);
        std::swap(interior[static_cast<std::size_t>(i)], interior[static_cast<std::size_t>(j)]);
    }
    std::vector<int> bounds;
    bounds.push_back(0);
    bounds.insert(bounds.end(), interior.begin(), interior.begin() + (n_bands - 1));
    std::sort(bounds.begin() + 1, bounds.end());
    bounds.push_back(f_len);

    std::vector<double> gains_db(static_cast<std::size_t>(n_bands));
    for (int i = 0; i < n_bands; ++i)
        gains_db[static_cast<std::size_t>(i)] = rng.uniform(cfg.filter_db_min, cfg.filter_db_max);

    // dB contour: knot at each band center, linear between knots, flat ends.
    std::vector<double> centers(static_cast<std::size_t>(n_bands));
    for (int i = 0; i < n_bands; ++i)
        centers[static_cast<std::size_t>(i)] =
            0.5 * (bounds[static_cast<std::size_t>(i)] + bounds[static_cast<std::size_t>(i) + 1] - 1);
    std::vector<float> gain(static_cast<std::size_t>(f_len));
    for (int f = 0; f < f_len; ++f) {
        double db;
        if (f <= centers.front()) {
            db = gains_db.front();
        } else if (f >= centers.back()) {
            db = gains_db.back();
        } else {
            int i = 0;
            while (centers[static_cast<std::size_t>(i + 1)] < f) ++i;
            const double c0 = centers[static_cast<std::size_t>(i)];
            const double c1 = centers[static_cast<std::size_t>(i + 1)];
            const double u = (f - c0) / (c1 - c0);
            db = (1.0 - u) * gains_db[static_cast<std::size_t>(i)] +
                 u * gains_db[static_cast<std::size_t>(i + 1)];
        }
        gain[static_cast<std::size_t>(f)] = static_cast<float>(std::pow(10.0, db / 20.0));
    }

    TensorF y = x;
    const std::size_t plane = static_cast<std::size_t>(f_len) * t_len;
    const std::size_t outer = x.numel() / plane;
    for (std::size_t o = 0; o < outer; ++o)
        for (int f = 0; f < f_len; ++f) {
            float* row = y.data() + o * plane + static_cast<std::size_t>(f) * t_len;
            const float g = gain[static_cast<std::size_t>(f)];
            for (int t = 0; t < t_len; ++t) row[t] *= g;
        }
    return y;
}

std::pair<TensorF, TensorF> frame_shift(const TensorF& x, const TensorF& y, int shift) {
    if (x.ndim() < 1 || y.ndim() < 1) throw std::invalid_argument("frame_shift: need at least 1 axis");
    const int t_len = x.dim(x.ndim() - 1);
    if (y.dim(0) != t_len)
        throw std::invalid_argument("frame_shift: label frame count must match feature frames");
    int s = shift % t_len;
    if (s < 0) s += t_len;
    TensorF xs(x.dims());
    const std::size_t rows = x.numel() / static_cast<std::size_t>(t_len);
    for (std::size_t r = 0; r < rows; ++r) {
        const float* src = x.data() + r * static_cast<std::size_t>(t_len);
        float* dst = xs.data() + r * static_cast<std::size_t>(t_len);
        for (int t = 0; t < t_len; ++t) dst[(t + s) % t_len] = src[t];
    }
    TensorF ys(y.dims());
    const std::size_t cols = y.numel() / static_cast<std::size_t>(t_len);
    for (int t = 0; t < t_len; ++t) {
        const float* src = y.data() + static_cast<std::size_t>(t) * cols;
        float* dst = ys.data() + static_cast<std::size_t>((t + s) % t_len) * cols;
        for (std::size_t c = 0; c < cols; ++c) dst[c] = src[c];
    }
    return {std::move(xs), std::move(ys)};
}

int draw_frame_shift(Rng& rng, const AugmentConfig& cfg) {
    cfg.validate();
    return rng.uniform_int(2 * cfg.frame_shift_max + 1) - cfg.frame_shift_max;
}

void ema_update(TensorF& teacher, const TensorF& student, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("ema_update: alpha must be in [0,1]");
    if (!teacher.same_shape(student)) throw std::invalid_argument("ema_update: shape mismatch");
    const float a = static_cast<float>(alpha);
    for (std::size_t i = 0; i < teacher.numel(); ++i)
        teacher[i] = a * teacher[i] + (1.0f - a) * student[i];
}

void ema_update(ModelParams& teacher, const ModelParams& student, double alpha) {
    auto treg = tensor_registry(teacher);
    auto sreg = tensor_registry(const_cast<ModelParams&>(student));
    if (treg.size() != sreg.size())
        throw std::invalid_argument("ema_update: parameter sets differ in structure");
    for (std::size_t i = 0; i < treg.size(); ++i) {
        if (treg[i].name != sreg[i].name)
            throw std::invalid_argument("ema_update: parameter name mismatch at " + treg[i].name);
        ema_update(*treg[i].tensor, *sreg[i].tensor, alpha);
    }
}

}  // namespace sedkit
