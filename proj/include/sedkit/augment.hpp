#pragma once

#include <cstdint>
#include <utility>

#include "sedkit/model.hpp"
#include "sedkit/rng.hpp"
#include "sedkit/tensor.hpp"

namespace sedkit {

// Hyperparameters are configuration defaults, not claims about any reference
// training recipe.
struct AugmentConfig {
    double mixup_beta = 0.2;       // Beta(b, b) for the mixing weight
    int time_mask_max_width = 32;  // frames
    int filter_bands_min = 3;
    int filter_bands_max = 6;
    double filter_db_min = -6.0;
    double filter_db_max = 6.0;
    int frame_shift_max = 16;  // frames, either direction
    double ema_decay = 0.999;

    void validate() const;
};

// Convex combination of two feature/label pairs.
std::pair<TensorF, TensorF> mixup(const TensorF& x1, const TensorF& x2, const TensorF& y1,
                                  const TensorF& y2, double lambda);

double draw_mixup_lambda(Rng& rng, double beta);

// Sets one contiguous span along the trailing (time) axis to the tensor-wide
// mean value. Width is drawn from 0..max inclusive; width 0 is the identity.
TensorF time_mask(const TensorF& x, std::uint64_t seed, const AugmentConfig& cfg);

// Piecewise-linear random gain contour over the frequency axis (axis ndim-2):
// the band count and band boundaries are drawn, one dB gain per band is drawn
// in [db_min, db_max], and the contour interpolates linearly between band
// centers (flat outside the outermost centers).
TensorF filter_augment(const TensorF& x, std::uint64_t seed, const AugmentConfig& cfg);

// Circular shift along the trailing axis of x and the leading axis of y by
// the same amount; any integer shift is reduced modulo the extent.
std::pair<TensorF, TensorF> frame_shift(const TensorF& x, const TensorF& y, int shift);

int draw_frame_shift(Rng& rng, const AugmentConfig& cfg);

// teacher := alpha * teacher + (1 - alpha) * student, elementwise.
void ema_update(TensorF& teacher, const TensorF& student, double alpha);
void ema_update(ModelParams& teacher, const ModelParams& student, double alpha);

}  // namespace sedkit
