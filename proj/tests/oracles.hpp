#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is written as direct loop transcriptions with its own
// arithmetic order; nothing calls the library's forward paths.

#include <utility>
#include <vector>

#include "sedkit/attention.hpp"
#include "sedkit/events.hpp"
#include "sedkit/metrics.hpp"
#include "sedkit/model.hpp"
#include "sedkit/nn.hpp"
#include "sedkit/tensor.hpp"

namespace oracle {

sedkit::TensorF conv2d(const sedkit::TensorF& x, const sedkit::TensorF& w,
                       const sedkit::TensorF* b, const sedkit::Conv2dSpec& s);

sedkit::TensorF se(const sedkit::TensorF& x, const sedkit::SqueezeExciteParams<float>& p);
sedkit::TensorF tse(const sedkit::TensorF& x, const sedkit::SqueezeExciteParams<float>& p);
sedkit::TensorF fwse(const sedkit::TensorF& x, const sedkit::SqueezeExciteParams<float>& p);
sedkit::TensorF tfwse(const sedkit::TensorF& x, const sedkit::SqueezeExciteParams<float>& p);
sedkit::TensorF c2datt(const sedkit::TensorF& x, const sedkit::C2dAttParams<float>& p);
sedkit::TensorF fdy(const sedkit::TensorF& x, const sedkit::FdyConvParams<float>& p);

sedkit::TensorF bigru(const sedkit::GruLayerParams& layer, const sedkit::TensorF& seq,
                      int hidden);

// Straight-line re-evaluation of the whole network from the same parameters.
sedkit::ForwardResult crnn_forward(const sedkit::ModelParams& params, const sedkit::TensorF& mel);

sedkit::TensorF median_filter(const sedkit::TensorF& probs, int window);

// Full re-evaluation of the detection score: own decoding, own interval
// matching, midpoint-sampled step-ROC integration.
double psds(const std::vector<std::pair<sedkit::ClipEvents, sedkit::TensorF>>& dataset,
            const sedkit::PsdsConfig& cfg, double frame_dur,
            const std::vector<int>& median_windows = {});

}  // namespace oracle
