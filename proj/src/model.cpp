#include "sedkit/model.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sedkit/tnsr_io.hpp"

namespace sedkit {

std::string variant_name(AttentionVariant v) {
    switch (v) {
        case AttentionVariant::none: return "none";
        case AttentionVariant::se: return "se";
        case AttentionVariant::tse: return "tse";
        case AttentionVariant::fwse: return "fwse";
        case AttentionVariant::tfwse: return "tfwse";
        case AttentionVariant::se_tfwse: return "se+tfwse";
        case AttentionVariant::tfwse_se: return "tfwse+se";
        case AttentionVariant::c2datt: return "c2datt";
        case AttentionVariant::fdy: return "fdy";
    }
    throw std::invalid_argument("variant_name: unknown variant");
}

AttentionVariant parse_variant(const std::string& name) {
    for (AttentionVariant v :
         {AttentionVariant::none, AttentionVariant::se, AttentionVariant::tse,
          AttentionVariant::fwse, AttentionVariant::tfwse, AttentionVariant::se_tfwse,
          AttentionVariant::tfwse_se, AttentionVariant::c2datt, AttentionVariant::fdy})
        if (variant_name(v) == name) return v;
    throw std::invalid_argument("parse_variant: unknown variant '" + name + "'");
}

namespace {

bool uses_channel_se(AttentionVariant v) {
    return v == AttentionVariant::se || v == AttentionVariant::tse ||
           v == AttentionVariant::se_tfwse || v == AttentionVariant::tfwse_se;
}

bool uses_freq_se(AttentionVariant v) {
    return v == AttentionVariant::fwse || v == AttentionVariant::tfwse ||
           v == AttentionVariant::se_tfwse || v == AttentionVariant::tfwse_se;
}

constexpr int kScaleAttnBlocks = 6;  // scale attention attaches to blocks 1..6

}  // namespace

void ModelConfig::validate() const {
    if (channels.size() != 7) throw std::invalid_argument("ModelConfig: need exactly 7 channel counts");
    if (pooling.size() != 7) throw std::invalid_argument("ModelConfig: need exactly 7 pooling pairs");
    for (int c : channels)
        if (c < 1) throw std::invalid_argument("ModelConfig: channel counts must be positive");
    int f = mel_bins;
    for (const auto& [pf, pt] : pooling) {
        if (pf < 1 || pt < 1) throw std::invalid_argument("ModelConfig: pooling factors must be positive");
        if (f % pf != 0)
            throw std::invalid_argument("ModelConfig: pooling does not divide the frequency extent");
        f /= pf;
    }
    if (f != 1)
        throw std::invalid_argument("ModelConfig: frequency extent must collapse to exactly 1");
    if (kernel < 1 || kernel % 2 == 0)
        throw std::invalid_argument("ModelConfig: kernel must be odd and positive");
    if (gru_hidden < 1) throw std::invalid_argument("ModelConfig: gru_hidden must be positive");
    if (gru_layers < 1) throw std::invalid_argument("ModelConfig: gru_layers must be positive");
    if (n_classes < 1) throw std::invalid_argument("ModelConfig: n_classes must be positive");
    if (mel_bins < 1) throw std::invalid_argument("ModelConfig: mel_bins must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("ModelConfig: dropout must be in [0,1)");
    if (reduction < 1) throw std::invalid_argument("ModelConfig: reduction must be positive");
    if (fdy_basis < 1) throw std::invalid_argument("ModelConfig: fdy_basis must be positive");
    if (fdy_temperature <= 0.0)
        throw std::invalid_argument("ModelConfig: fdy_temperature must be > 0");
    const auto fx = freq_extents();
    for (int i = 0; i < kScaleAttnBlocks; ++i) {
        if (uses_channel_se(attention) && channels[static_cast<std::size_t>(i)] % reduction != 0)
            throw std::invalid_argument("ModelConfig: reduction must divide attached channel counts");
        if (uses_freq_se(attention) && fx[static_cast<std::size_t>(i)] % reduction != 0)
            throw std::invalid_argument("ModelConfig: reduction must divide attached frequency extents");
    }
}

std::vector<int> ModelConfig::freq_extents() const {
    std::vector<int> out;
    int f = mel_bins;
    for (const auto& [pf, pt] : pooling) {
        out.push_back(f);
        f /= pf;
    }
    return out;
}

ModelParams build(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    ModelParams p;
    p.config = config;
    const auto fx = config.freq_extents();
    const int pad = (config.kernel - 1) / 2;

    int in_ch = 1;
    for (int i = 0; i < 7; ++i) {
        ConvBlockParams blk;
        const int out_ch = config.channels[static_cast<std::size_t>(i)];
        blk.spec.in_channels = in_ch;
        blk.spec.out_channels = out_ch;
        blk.spec.kernel_h = blk.spec.kernel_w = config.kernel;
        blk.spec.pad_h = blk.spec.pad_w = pad;
        const bool fdy_block = config.attention == AttentionVariant::fdy && i >= 1;
        if (fdy_block) {
            blk.fdy = FdyConvParams<float>::init(blk.spec, config.fdy_basis,
                                                 config.fdy_temperature, rng);
        } else {
            const float a = static_cast<float>(
                std::sqrt(1.0 / (static_cast<double>(in_ch) * config.kernel * config.kernel)));
            blk.conv_w = TensorF::random_uniform({out_ch, in_ch, config.kernel, config.kernel},
                                                 rng, -a, a);
            blk.conv_b = TensorF::random_uniform({out_ch}, rng, -a, a);
        }
        blk.bn_gamma = TensorF({out_ch}, 1.0f);
        blk.bn_beta = TensorF({out_ch});
        blk.bn_mean = TensorF({out_ch});
        blk.bn_var = TensorF({out_ch}, 1.0f);
        {
            const float a = static_cast<float>(std::sqrt(1.0 / out_ch));
            blk.cg_w = TensorF::random_uniform({out_ch, out_ch}, rng, -a, a);
            blk.cg_b = TensorF::random_uniform({out_ch}, rng, -a, a);
        }
        if (i < kScaleAttnBlocks) {
            const int f_here = fx[static_cast<std::size_t>(i)];
            auto add_se = [&](AttentionKind kind, int d) {
                AttentionModule<float> m;
                m.kind = kind;
                m.se = SqueezeExciteParams<float>::init(d, config.reduction, rng);
                blk.attention.push_back(std::move(m));
            };
            switch (config.attention) {
                case AttentionVariant::se: add_se(AttentionKind::se, out_ch); break;
                case AttentionVariant::tse: add_se(AttentionKind::tse, out_ch); break;
                case AttentionVariant::fwse: add_se(AttentionKind::fwse, f_here); break;
                case AttentionVariant::tfwse: add_se(AttentionKind::tfwse, f_here); break;
                case AttentionVariant::se_tfwse:
                    add_se(AttentionKind::se, out_ch);
                    add_se(AttentionKind::tfwse, f_here);
                    break;
                case AttentionVariant::tfwse_se:
                    add_se(AttentionKind::tfwse, f_here);
                    add_se(AttentionKind::se, out_ch);
                    break;
                case AttentionVariant::c2datt: {
                    AttentionModule<float> m;
                    m.kind = AttentionKind::c2datt;
                    m.c2d = C2dAttParams<float>::init(8, 3, rng);
                    blk.attention.push_back(std::move(m));
                    break;
                }
                case AttentionVariant::none:
                case AttentionVariant::fdy: break;
            }
        }
        blk.pool_f = config.pooling[static_cast<std::size_t>(i)].first;
        blk.pool_t = config.pooling[static_cast<std::size_t>(i)].second;
        p.blocks.push_back(std::move(blk));
        in_ch = out_ch;
    }

    const int H = config.gru_hidden;
    int d = config.channels.back();
    for (int l = 0; l < config.gru_layers; ++l) {
        const float a = static_cast<float>(std::sqrt(1.0 / H));
        GruLayerParams layer;
        for (GruDirParams* dir : {&layer.fwd, &layer.bwd}) {
            dir->w_ih = TensorF::random_uniform({3 * H, d}, rng, -a, a);
            dir->w_hh = TensorF::random_uniform({3 * H, H}, rng, -a, a);
            dir->b_ih = TensorF::random_uniform({3 * H}, rng, -a, a);
            dir->b_hh = TensorF::random_uniform({3 * H}, rng, -a, a);
        }
        p.gru.push_back(std::move(layer));
        d = 2 * H;
    }

    const float a = static_cast<float>(std::sqrt(1.0 / (2.0 * H)));
    p.strong_w = TensorF::random_uniform({config.n_classes, 2 * H}, rng, -a, a);
    p.strong_b = TensorF::random_uniform({config.n_classes}, rng, -a, a);
    p.weak_w = TensorF::random_uniform({config.n_classes, 2 * H}, rng, -a, a);
    p.weak_b = TensorF::random_uniform({config.n_classes}, rng, -a, a);
    return p;
}

// Channel gate at every (b,f,t) position: y_c = x_c * sigmoid(W x + b)_c.
TensorF context_gate(const TensorF& x, const TensorF& w, const TensorF& b) {
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    TensorF y(x.dims());
    std::vector<float> v(static_cast<std::size_t>(C));
    for (int bi = 0; bi < B; ++bi)
        for (int f = 0; f < F; ++f)
            for (int t = 0; t < Tt; ++t) {
                for (int c = 0; c < C; ++c) v[static_cast<std::size_t>(c)] = x.at(bi, c, f, t);
                for (int c = 0; c < C; ++c) {
                    float acc = b.at(c);
                    const float* wr = &w.at(c, 0);
                    for (int j = 0; j < C; ++j) acc += wr[j] * v[static_cast<std::size_t>(j)];
                    y.at(bi, c, f, t) = v[static_cast<std::size_t>(c)] * sigmoid_scalar(acc);
                }
            }
    return y;
}

namespace {

void gru_direction(const GruDirParams& dir, const TensorF& seq, int b, int H, bool reverse,
                   TensorF& out, int out_off) {
    const int Tt = seq.dim(1), D = seq.dim(2);
    std::vector<float> h(static_cast<std::size_t>(H), 0.0f);
    std::vector<float> gi(static_cast<std::size_t>(3 * H)), gh(static_cast<std::size_t>(3 * H));
    for (int step = 0; step < Tt; ++step) {
        const int t = reverse ? Tt - 1 - step : step;
        const float* x = &seq.at(b, t, 0);
        for (int r = 0; r < 3 * H; ++r) {
            float acc = dir.b_ih.at(r);
            const float* wr = &dir.w_ih.at(r, 0);
            for (int j = 0; j < D; ++j) acc += wr[j] * x[j];
            gi[static_cast<std::size_t>(r)] = acc;
        }
        for (int r = 0; r < 3 * H; ++r) {
            float acc = dir.b_hh.at(r);
            const float* wr = &dir.w_hh.at(r, 0);
            for (int j = 0; j < H; ++j) acc += wr[j] * h[static_cast<std::size_t>(j)];
            gh[static_cast<std::size_t>(r)] = acc;
        }
        for (int j = 0; j < H; ++j) {
            const float rg = sigmoid_scalar(gi[static_cast<std::size_t>(j)] + gh[static_cast<std::size_t>(j)]);
            const float zg = sigmoid_scalar(gi[static_cast<std::size_t>(H + j)] + gh[static_cast<std::size_t>(H + j)]);
            const float ng = std::tanh(gi[static_cast<std::size_t>(2 * H + j)] +
                                       rg * gh[static_cast<std::size_t>(2 * H + j)]);
            h[static_cast<std::size_t>(j)] = (1.0f - zg) * ng + zg * h[static_cast<std::size_t>(j)];
        }
        for (int j = 0; j < H; ++j) out.at(b, t, out_off + j) = h[static_cast<std::size_t>(j)];
    }
}

}  // namespace

TensorF bigru_forward(const GruLayerParams& layer, const TensorF& seq, int hidden) {
    if (seq.ndim() != 3) throw std::invalid_argument("bigru_forward: input must be 3D [B,T,D]");
    const int B = seq.dim(0), Tt = seq.dim(1), D = seq.dim(2);
    ensure_shape(layer.fwd.w_ih, {3 * hidden, D}, "bigru w_ih");
    ensure_shape(layer.fwd.w_hh, {3 * hidden, hidden}, "bigru w_hh");
    ensure_shape(layer.bwd.w_ih, {3 * hidden, D}, "bigru w_ih (reverse)");
    ensure_shape(layer.bwd.w_hh, {3 * hidden, hidden}, "bigru w_hh (reverse)");
    TensorF out({B, Tt, 2 * hidden});
    for (int b = 0; b < B; ++b) {
        gru_direction(layer.fwd, seq, b, hidden, false, out, 0);
        gru_direction(layer.bwd, seq, b, hidden, true, out, hidden);
    }
    return out;
}

ForwardResult forward(const ModelParams& params, const TensorF& mel, ForwardTrace* trace) {
    const ModelConfig& cfg = params.config;
    if (mel.ndim() != 4 || mel.dim(1) != 1)
        throw std::invalid_argument("forward: input must be [B,1,mel_bins,T]");
    if (mel.dim(2) != cfg.mel_bins)
        throw std::invalid_argument("forward: mel bin count mismatch");
    ensure_finite(mel, "forward input");

    TensorF x = mel;
    for (const auto& blk : params.blocks) {
        TensorF y = blk.fdy ? fdy_forward(x, *blk.fdy)
                            : conv2d(x, blk.conv_w, &blk.conv_b, blk.spec);
        y = batchnorm_infer(y, blk.bn_gamma, blk.bn_beta, blk.bn_mean, blk.bn_var);
        y = context_gate(y, blk.cg_w, blk.cg_b);
        y = chain(blk.attention, y);
        if (trace) trace->pre_pool.push_back(y);
        x = avg_pool2d(y, blk.pool_f, blk.pool_t);
    }

    const int B = x.dim(0), C = x.dim(1), Tt = x.dim(3);
    if (x.dim(2) != 1) throw std::runtime_error("forward: frequency extent did not collapse to 1");
    TensorF seq({B, Tt, C});
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < Tt; ++t)
            for (int c = 0; c < C; ++c) seq.at(b, t, c) = x.at(b, c, 0, t);

    for (const auto& layer : params.gru) seq = bigru_forward(layer, seq, cfg.gru_hidden);
    if (trace) trace->gru_out = seq;

    ForwardResult res;
    res.strong = sigmoid(linear(seq, params.strong_w, &params.strong_b));
    const TensorF attn = softmax(linear(seq, params.weak_w, &params.weak_b), 1);
    if (trace) trace->weak_attn = attn;
    res.weak = TensorF({B, cfg.n_classes});
    for (int b = 0; b < B; ++b)
        for (int k = 0; k < cfg.n_classes; ++k) {
            double acc = 0.0;
            for (int t = 0; t < Tt; ++t)
                acc += static_cast<double>(attn.at(b, t, k)) * res.strong.at(b, t, k);
            res.weak.at(b, k) = static_cast<float>(acc);
        }
    return res;
}

CostReport param_audit(const ModelConfig& config) {
    config.validate();
    CostReport rep;
    auto add = [&](const std::string& name, long long n) {
        rep.components.push_back({name, n});
        rep.total += n;
    };
    const auto fx = config.freq_extents();
    int in_ch = 1;
    for (int i = 0; i < 7; ++i) {
        const int out_ch = config.channels[static_cast<std::size_t>(i)];
        const std::string tag = "block" + std::to_string(i + 1);
        Conv2dSpec s;
        s.in_channels = in_ch;
        s.out_channels = out_ch;
        s.kernel_h = s.kernel_w = config.kernel;
        const bool fdy_block = config.attention == AttentionVariant::fdy && i >= 1;
        add(tag + ".conv", fdy_block ? fdy_param_count(s, config.fdy_basis) : s.param_count());
        add(tag + ".bn", 2LL * out_ch);
        add(tag + ".gate", static_cast<long long>(out_ch) * out_ch + out_ch);
        if (i < kScaleAttnBlocks) {
            const int f_here = fx[static_cast<std::size_t>(i)];
            long long attn = 0;
            switch (config.attention) {
                case AttentionVariant::se:
                case AttentionVariant::tse: attn = se_param_count(out_ch, config.reduction); break;
                case AttentionVariant::fwse:
                case AttentionVariant::tfwse: attn = fwse_param_count(f_here, config.reduction); break;
                case AttentionVariant::se_tfwse:
                case AttentionVariant::tfwse_se:
                    attn = se_param_count(out_ch, config.reduction) +
                           fwse_param_count(f_here, config.reduction);
                    break;
                case AttentionVariant::c2datt: attn = c2datt_param_count(); break;
                case AttentionVariant::none:
                case AttentionVariant::fdy: break;
            }
            if (attn > 0) add(tag + ".attn", attn);
        }
        in_ch = out_ch;
    }
    const long long H = config.gru_hidden;
    long long d = config.channels.back();
    for (int l = 0; l < config.gru_layers; ++l) {
        add("gru" + std::to_string(l + 1), 2 * (3 * H * d + 3 * H * H + 6 * H));
        d = 2 * H;
    }
    add("head.strong", 2 * H * config.n_classes + config.n_classes);
    add("head.weak", 2 * H * config.n_classes + config.n_classes);
    return rep;
}

std::vector<NamedTensor> tensor_registry(ModelParams& params) {
    std::vector<NamedTensor> reg;
    auto add = [&](const std::string& name, TensorF& t, bool trainable) {
        reg.push_back({name, &t, trainable});
    };
    for (std::size_t i = 0; i < params.blocks.size(); ++i) {
        auto& blk = params.blocks[i];
        const std::string tag = "block" + std::to_string(i + 1);
        if (blk.fdy) {
            auto& f = *blk.fdy;
            for (int k = 0; k < f.basis_count(); ++k) {
                add(tag + ".fdy.basis_w" + std::to_string(k), f.basis_w[static_cast<std::size_t>(k)], true);
                if (f.spec.bias)
                    add(tag + ".fdy.basis_b" + std::to_string(k), f.basis_b[static_cast<std::size_t>(k)], true);
            }
            add(tag + ".fdy.attn_w", f.attn_w, true);
            add(tag + ".fdy.attn_b", f.attn_b, true);
            add(tag + ".fdy.norm_mean", f.norm_mean, false);
            add(tag + ".fdy.norm_var", f.norm_var, false);
        } else {
            add(tag + ".conv.w", blk.conv_w, true);
            add(tag + ".conv.b", blk.conv_b, true);
        }
        add(tag + ".bn.gamma", blk.bn_gamma, true);
        add(tag + ".bn.beta", blk.bn_beta, true);
        add(tag + ".bn.mean", blk.bn_mean, false);
        add(tag + ".bn.var", blk.bn_var, false);
        add(tag + ".gate.w", blk.cg_w, true);
        add(tag + ".gate.b", blk.cg_b, true);
        for (std::size_t j = 0; j < blk.attention.size(); ++j) {
            auto& m = blk.attention[j];
            const std::string atag = tag + ".attn" + std::to_string(j);
            if (m.kind == AttentionKind::c2datt) {
                add(atag + ".conv1_w", m.c2d.conv1_w, true);
                add(atag + ".conv1_b", m.c2d.conv1_b, true);
                add(atag + ".conv2_w", m.c2d.conv2_w, true);
                add(atag + ".conv2_b", m.c2d.conv2_b, true);
            } else {
                add(atag + ".w1", m.se.w1, true);
                add(atag + ".w2", m.se.w2, true);
            }
        }
    }
    for (std::size_t l = 0; l < params.gru.size(); ++l) {
        const std::string tag = "gru" + std::to_string(l + 1);
        auto& layer = params.gru[l];
        add(tag + ".fwd.w_ih", layer.fwd.w_ih, true);
        add(tag + ".fwd.w_hh", layer.fwd.w_hh, true);
        add(tag + ".fwd.b_ih", layer.fwd.b_ih, true);
        add(tag + ".fwd.b_hh", layer.fwd.b_hh, true);
        add(tag + ".bwd.w_ih", layer.bwd.w_ih, true);
        add(tag + ".bwd.w_hh", layer.bwd.w_hh, true);
        add(tag + ".bwd.b_ih", layer.bwd.b_ih, true);
        add(tag + ".bwd.b_hh", layer.bwd.b_hh, true);
    }
    add("head.strong.w", params.strong_w, true);
    add("head.strong.b", params.strong_b, true);
    add("head.weak.w", params.weak_w, true);
    add("head.weak.b", params.weak_b, true);
    return reg;
}

long long count_params(const ModelParams& params) {
    auto& mutable_params = const_cast<ModelParams&>(params);  // registry only reads
    long long n = 0;
    for (const auto& entry : tensor_registry(mutable_params))
        if (entry.trainable) n += static_cast<long long>(entry.tensor->numel());
    return n;
}

void save_weights(ModelParams& params, const std::string& dir) {
    std::vector<std::pair<std::string, const TensorF*>> tensors;
    for (const auto& entry : tensor_registry(params)) tensors.emplace_back(entry.name, entry.tensor);
    save_tensors(dir, tensors);
}

void load_weights(ModelParams& params, const std::string& dir) {
    auto loaded = load_tensors(dir);
    std::map<std::string, TensorF*> by_name;
    for (auto& [name, t] : loaded) by_name[name] = &t;
    std::size_t used = 0;
    for (auto& entry : tensor_registry(params)) {
        auto it = by_name.find(entry.name);
        if (it == by_name.end())
            throw std::runtime_error("load_weights: missing tensor '" + entry.name + "'");
        if (!entry.tensor->same_shape(*it->second))
            throw std::runtime_error("load_weights: shape mismatch for '" + entry.name + "'");
        *entry.tensor = *it->second;
        ++used;
    }
    if (used != loaded.size())
        throw std::runtime_error("load_weights: weight directory contains unknown tensors");
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

int parse_int(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for " + key + ": '" + s + "'");
    }
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for " + key + ": '" + s + "'");
    }
}

}  // namespace

ModelConfig parse_config_text(const std::string& text) {
    ModelConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key=value, got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key == "attention") {
            cfg.attention = parse_variant(val);
        } else if (key == "channels") {
            cfg.channels.clear();
            for (const auto& tok : split(val, ',')) cfg.channels.push_back(parse_int(trim(tok), key));
        } else if (key == "pooling") {
            cfg.pooling.clear();
            for (const auto& tok : split(val, ',')) {
                const auto x = trim(tok).find('x');
                if (x == std::string::npos)
                    throw std::invalid_argument("config: pooling entries must be FxT, got '" + tok + "'");
                cfg.pooling.emplace_back(parse_int(trim(tok).substr(0, x), key),
                                         parse_int(trim(tok).substr(x + 1), key));
            }
        } else if (key == "gru_hidden") {
            cfg.gru_hidden = parse_int(val, key);
        } else if (key == "gru_layers") {
            cfg.gru_layers = parse_int(val, key);
        } else if (key == "n_classes") {
            cfg.n_classes = parse_int(val, key);
        } else if (key == "mel_bins") {
            cfg.mel_bins = parse_int(val, key);
        } else if (key == "reduction") {
            cfg.reduction = parse_int(val, key);
        } else if (key == "fdy_basis") {
            cfg.fdy_basis = parse_int(val, key);
        } else if (key == "fdy_temperature") {
            cfg.fdy_temperature = parse_double(val, key);
        } else if (key == "dropout") {
            cfg.dropout = parse_double(val, key);
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

ModelConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("parse_config_file: cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_to_text(const ModelConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "attention=" << variant_name(cfg.attention) << '\n';
    os << "channels=";
    for (std::size_t i = 0; i < cfg.channels.size(); ++i)
        os << (i ? "," : "") << cfg.channels[i];
    os << '\n';
    os << "pooling=";
    for (std::size_t i = 0; i < cfg.pooling.size(); ++i)
        os << (i ? "," : "") << cfg.pooling[i].first << 'x' << cfg.pooling[i].second;
    os << '\n';
    os << "gru_hidden=" << cfg.gru_hidden << '\n';
    os << "gru_layers=" << cfg.gru_layers << '\n';
    os << "n_classes=" << cfg.n_classes << '\n';
    os << "mel_bins=" << cfg.mel_bins << '\n';
    os << "reduction=" << cfg.reduction << '\n';
    os << "fdy_basis=" << cfg.fdy_basis << '\n';
    os << "fdy_temperature=" << cfg.fdy_temperature << '\n';
    os << "dropout=" << cfg.dropout << '\n';
    return os.str();
}

std::vector<std::pair<std::string, ModelConfig>> table_configs() {
    std::vector<std::pair<std::string, ModelConfig>> out;
    for (AttentionVariant v :
         {AttentionVariant::none, AttentionVariant::se, AttentionVariant::tse,
          AttentionVariant::fwse, AttentionVariant::tfwse, AttentionVariant::se_tfwse,
          AttentionVariant::tfwse_se, AttentionVariant::c2datt, AttentionVariant::fdy}) {
        ModelConfig cfg;
        cfg.attention = v;
        out.emplace_back(v == AttentionVariant::none ? "baseline" : variant_name(v), cfg);
    }
    return out;
}

}  // namespace sedkit
