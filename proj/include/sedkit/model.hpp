#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sedkit/attention.hpp"
#include "sedkit/nn.hpp"
#include "sedkit/rng.hpp"
#include "sedkit/tensor.hpp"

namespace sedkit {

enum class AttentionVariant { none, se, tse, fwse, tfwse, se_tfwse, tfwse_se, c2datt, fdy };

std::string variant_name(AttentionVariant v);
AttentionVariant parse_variant(const std::string& name);

// Host network: 7 convolution blocks, a 2-layer bidirectional GRU, and two
// FC heads. Each block is Conv -> BatchNorm -> context gate -> [attention]
// -> AvgPool; dropout is identity at inference. Scale attention attaches to
// blocks 1..6; the frequency-adaptive convolution replaces the plain
// convolution in blocks 2..7.
struct ModelConfig {
    std::vector<int> channels = {32, 64, 128, 256, 256, 256, 256};
    std::vector<std::pair<int, int>> pooling = {{2, 2}, {2, 2}, {2, 1}, {2, 1},
                                                {2, 1}, {2, 1}, {2, 1}};
    int kernel = 3;
    int gru_hidden = 256;
    int gru_layers = 2;
    int n_classes = 10;
    int mel_bins = 128;
    AttentionVariant attention = AttentionVariant::none;
    int reduction = 4;
    int fdy_basis = 4;
    double fdy_temperature = 1.0;
    double dropout = 0.5;

    void validate() const;
    // Frequency extent entering each block (also the attention insertion
    // extent, since the same-padded conv preserves it).
    std::vector<int> freq_extents() const;
};

struct ConvBlockParams {
    Conv2dSpec spec;
    TensorF conv_w, conv_b;                     // plain convolution
    std::optional<FdyConvParams<float>> fdy;    // replaces the plain conv when set
    TensorF bn_gamma, bn_beta, bn_mean, bn_var; // stats are stored, not trainable
    TensorF cg_w, cg_b;                         // per-position channel gate, C x C
    std::vector<AttentionModule<float>> attention;
    int pool_f = 1, pool_t = 1;
};

struct GruDirParams {
    TensorF w_ih, w_hh;  // [3H, D], [3H, H]; gate order r, z, n
    TensorF b_ih, b_hh;  // [3H]
};

struct GruLayerParams {
    GruDirParams fwd, bwd;
};

struct ModelParams {
    ModelConfig config;
    std::vector<ConvBlockParams> blocks;
    std::vector<GruLayerParams> gru;
    TensorF strong_w, strong_b;  // [n_classes, 2H]
    TensorF weak_w, weak_b;      // [n_classes, 2H]
};

// Deterministic initialization: every trainable tensor except the batchnorm
// affine is drawn uniform(-a, a), a = sqrt(1/fan_in), from one seeded stream
// in declaration order (blocks, then GRU layers, then heads).
ModelParams build(const ModelConfig& config, std::uint64_t seed);

struct ForwardTrace {
    std::vector<TensorF> pre_pool;  // per block, after attention, before pooling
    TensorF gru_out;                // [B, T', 2H]
    TensorF weak_attn;              // [B, T', n_classes]; sums to 1 over T'
};

struct ForwardResult {
    TensorF strong;  // [B, T', n_classes], per-frame probabilities
    TensorF weak;    // [B, n_classes], attention-pooled clip probabilities
};

ForwardResult forward(const ModelParams& params, const TensorF& mel,
                      ForwardTrace* trace = nullptr);

// One bidirectional layer; returns forward and backward states concatenated
// on the feature axis.
TensorF bigru_forward(const GruLayerParams& layer, const TensorF& seq, int hidden);

// Channel gate applied at every (b,f,t) position: y_c = x_c * sigmoid(W x + b)_c
// with W of shape [C, C].
TensorF context_gate(const TensorF& x, const TensorF& w, const TensorF& b);

struct CostComponent {
    std::string name;
    long long count = 0;
};

struct CostReport {
    std::vector<CostComponent> components;
    long long total = 0;
};

// Closed-form trainable-parameter counts; must equal count_params(build(...)).
CostReport param_audit(const ModelConfig& config);

// Enumerates allocated trainable scalars.
long long count_params(const ModelParams& params);

struct NamedTensor {
    std::string name;
    TensorF* tensor = nullptr;
    bool trainable = true;
};

// Stable-ordered view of every tensor in the model, trainable or not.
std::vector<NamedTensor> tensor_registry(ModelParams& params);

void save_weights(ModelParams& params, const std::string& dir);
void load_weights(ModelParams& params, const std::string& dir);

// Plain-text key=value config; unknown keys are errors. Recognized keys:
// attention, channels, pooling, gru_hidden, gru_layers, n_classes, mel_bins,
// reduction, fdy_basis, fdy_temperature, dropout.
ModelConfig parse_config_file(const std::string& path);
ModelConfig parse_config_text(const std::string& text);

// Inverse of parse_config_text; round-trips every recognized key.
std::string config_to_text(const ModelConfig& cfg);

// The nine comparison configurations: baseline plus the eight variants.
std::vector<std::pair<std::string, ModelConfig>> table_configs();

}  // namespace sedkit
