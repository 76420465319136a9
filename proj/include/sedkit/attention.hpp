#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "sedkit/nn.hpp"
#include "sedkit/rng.hpp"
#include "sedkit/tensor.hpp"

namespace sedkit {

// Shared parameter set for the squeeze-and-excitation family. d is the
// squeezed extent: the channel count for se/tse, the frequency extent for
// fwse/tfwse. Both excitation layers are bias-free.
template <typename T>
struct SqueezeExciteParams {
    Tensor<T> w1;  // [d/r, d]
    Tensor<T> w2;  // [d, d/r]
    int reduction = 4;

    int dim() const { return w2.dim(0); }

    void validate() const {
        if (reduction < 1) throw std::invalid_argument("SqueezeExciteParams: reduction must be >= 1");
        if (w1.ndim() != 2 || w2.ndim() != 2)
            throw std::invalid_argument("SqueezeExciteParams: weights must be 2D");
        const int d = w1.dim(1);
        if (d % reduction != 0)
            throw std::invalid_argument("SqueezeExciteParams: reduction must divide the squeezed extent");
        if (w1.dim(0) != d / reduction || w2.dim(0) != d || w2.dim(1) != d / reduction)
            throw std::invalid_argument("SqueezeExciteParams: inconsistent weight shapes");
    }

    long long param_count() const {
        return static_cast<long long>(w1.numel()) + static_cast<long long>(w2.numel());
    }

    static SqueezeExciteParams init(int d, int r, Rng& rng) {
        if (r < 1 || d % r != 0)
            throw std::invalid_argument("SqueezeExciteParams: reduction must divide the squeezed extent");
        SqueezeExciteParams p;
        p.reduction = r;
        const T a1 = static_cast<T>(std::sqrt(1.0 / d));
        const T a2 = static_cast<T>(std::sqrt(1.0 / (d / r)));
        p.w1 = Tensor<T>::random_uniform({d / r, d}, rng, -a1, a1);
        p.w2 = Tensor<T>::random_uniform({d, d / r}, rng, -a2, a2);
        return p;
    }

    static SqueezeExciteParams zeros(int d, int r) {
        if (r < 1 || d % r != 0)
            throw std::invalid_argument("SqueezeExciteParams: reduction must divide the squeezed extent");
        SqueezeExciteParams p;
        p.reduction = r;
        p.w1 = Tensor<T>({d / r, d});
        p.w2 = Tensor<T>({d, d / r});
        return p;
    }
};

template <typename T>
struct SqueezeExciteGrads {
    Tensor<T> gx, gw1, gw2;
};

namespace detail {

// Excitation MLP over the trailing axis: sigmoid(w2 * relu(w1 * z)).
template <typename T>
Tensor<T> excite(const Tensor<T>& z, const SqueezeExciteParams<T>& p) {
    return sigmoid(linear<T>(relu(linear<T>(z, p.w1, nullptr)), p.w2, nullptr));
}

// VJP of excite; gz plus parameter gradients.
template <typename T>
SqueezeExciteGrads<T> excite_backward(const Tensor<T>& z, const SqueezeExciteParams<T>& p,
                                      const Tensor<T>& gs) {
    const Tensor<T> h1 = linear<T>(z, p.w1, nullptr);
    const Tensor<T> a1 = relu(h1);
    const Tensor<T> s = sigmoid(linear<T>(a1, p.w2, nullptr));
    const Tensor<T> gh2 = sigmoid_backward(s, gs);
    LinearGrads<T> l2 = linear_backward(a1, p.w2, gh2);
    const Tensor<T> gh1 = relu_backward(h1, l2.gx);
    LinearGrads<T> l1 = linear_backward(z, p.w1, gh1);
    SqueezeExciteGrads<T> g;
    g.gx = std::move(l1.gx);  // gradient w.r.t. z; caller spreads it over the pooled axes
    g.gw1 = std::move(l1.gw);
    g.gw2 = std::move(l2.gw);
    return g;
}

}  // namespace detail

// Channel scale from a full mean over frequency and time:
// z[b,c] = mean_{f,t} x[b,c,f,t]; y = sigmoid(w2 relu(w1 z)) * x.
template <typename T>
Tensor<T> se_forward(const Tensor<T>& x, const SqueezeExciteParams<T>& p) {
    p.validate();
    if (x.ndim() != 4) throw std::invalid_argument("se_forward: input must be 4D [B,C,F,T]");
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    if (C != p.dim()) throw std::invalid_argument("se_forward: channel extent mismatch");
    Tensor<T> z({B, C});
    const double inv = 1.0 / (static_cast<double>(F) * Tt);
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c) {
            double acc = 0.0;
            const T* src = &x.at(b, c, 0, 0);
            for (int i = 0; i < F * Tt; ++i) acc += static_cast<double>(src[i]);
            z.at(b, c) = static_cast<T>(acc * inv);
        }
    const Tensor<T> s = detail::excite(z, p);
    Tensor<T> y(x.dims());
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c) {
            const T sv = s.at(b, c);
            const T* src = &x.at(b, c, 0, 0);
            T* dst = &y.at(b, c, 0, 0);
            for (int i = 0; i < F * Tt; ++i) dst[i] = sv * src[i];
        }
    return y;
}

template <typename T>
SqueezeExciteGrads<T> se_backward(const Tensor<T>& x, const SqueezeExciteParams<T>& p,
                                  const Tensor<T>& gy) {
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    Tensor<T> z({B, C});
    Tensor<T> gs({B, C});
    const double inv = 1.0 / (static_cast<double>(F) * Tt);
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c) {
            double zacc = 0.0, gacc = 0.0;
            const T* xs = &x.at(b, c, 0, 0);
            const T* gys = &gy.at(b, c, 0, 0);
            for (int i = 0; i < F * Tt; ++i) {
                zacc += static_cast<double>(xs[i]);
                gacc += static_cast<double>(gys[i]) * xs[i];
            }
            z.at(b, c) = static_cast<T>(zacc * inv);
            gs.at(b, c) = static_cast<T>(gacc);
        }
    const Tensor<T> s = detail::excite(z, p);
    SqueezeExciteGrads<T> g = detail::excite_backward(z, p, gs);
    const Tensor<T> gz = g.gx;
    g.gx = Tensor<T>(x.dims());
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c) {
            const T sv = s.at(b, c);
            const T spread = static_cast<T>(gz.at(b, c) * inv);
            const T* xs = &x.at(b, c, 0, 0);
            const T* gys = &gy.at(b, c, 0, 0);
            T* dst = &g.gx.at(b, c, 0, 0);
            (void)xs;
            for (int i = 0; i < F * Tt; ++i) dst[i] = gys[i] * sv + spread;
        }
    return g;
}

// Per-frame channel scale: the squeeze pools frequency only, so every time
// frame gets its own scale vector from the shared excitation weights.
template <typename T>
Tensor<T> tse_forward(const Tensor<T>& x, const SqueezeExciteParams<T>& p) {
    p.validate();
    if (x.ndim() != 4) throw std::invalid_argument("tse_forward: input must be 4D [B,C,F,T]");
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    if (C != p.dim()) throw std::invalid_argument("tse_forward: channel extent mismatch");
    Tensor<T> z({B, Tt, C});
    const double inv = 1.0 / F;
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int t = 0; t < Tt; ++t) {
                double acc = 0.0;
                for (int f = 0; f < F; ++f) acc += static_cast<double>(x.at(b, c, f, t));
                z.at(b, t, c) = static_cast<T>(acc * inv);
            }
    const Tensor<T> s = detail::excite(z, p);
    Tensor<T> y(x.dims());
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f)
                for (int t = 0; t < Tt; ++t) y.at(b, c, f, t) = s.at(b, t, c) * x.at(b, c, f, t);
    return y;
}

template <typename T>
SqueezeExciteGrads<T> tse_backward(const Tensor<T>& x, const SqueezeExciteParams<T>& p,
                                   const Tensor<T>& gy) {
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    Tensor<T> z({B, Tt, C});
    Tensor<T> gs({B, Tt, C});
    const double inv = 1.0 / F;
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int t = 0; t < Tt; ++t) {
                double zacc = 0.0, gacc = 0.0;
                for (int f = 0; f < F; ++f) {
                    zacc += static_cast<double>(x.at(b, c, f, t));
                    gacc += static_cast<double>(gy.at(b, c, f, t)) * x.at(b, c, f, t);
                }
                z.at(b, t, c) = static_cast<T>(zacc * inv);
                gs.at(b, t, c) = static_cast<T>(gacc);
            }
    const Tensor<T> s = detail::excite(z, p);
    SqueezeExciteGrads<T> g = detail::excite_backward(z, p, gs);
    const Tensor<T> gz = g.gx;
    g.gx = Tensor<T>(x.dims());
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f)
                for (int t = 0; t < Tt; ++t)
                    g.gx.at(b, c, f, t) =
                        gy.at(b, c, f, t) * s.at(b, t, c) + static_cast<T>(gz.at(b, t, c) * inv);
    return g;
}

// Frequency-wise scale from a full mean over channel and time:
// z[b,f] = mean_{c,t} x[b,c,f,t].
template <typename T>
Tensor<T> fwse_forward(const Tensor<T>& x, const SqueezeExciteParams<T>& p) {
    p.validate();
    if (x.ndim() != 4) throw std::invalid_argument("fwse_forward: input must be 4D [B,C,F,T]");
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    if (F != p.dim()) throw std::invalid_argument("fwse_forward: frequency extent mismatch");
    Tensor<T> z({B, F});
    const double inv = 1.0 / (static_cast<double>(C) * Tt);
    for (int b = 0; b < B; ++b)
        for (int f = 0; f < F; ++f) {
            double acc = 0.0;
            for (int c = 0; c < C; ++c)
                for (int t = 0; t < Tt; ++t) acc += static_cast<double>(x.at(b, c, f, t));
            z.at(b, f) = static_cast<T>(acc * inv);
        }
    const Tensor<T> s = detail::excite(z, p);
    Tensor<T> y(x.dims());
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f) {
                const T sv = s.at(b, f);
                for (int t = 0; t < Tt; ++t) y.at(b, c, f, t) = sv * x.at(b, c, f, t);
            }
    return y;
}

template <typename T>
SqueezeExciteGrads<T> fwse_backward(const Tensor<T>& x, const SqueezeExciteParams<T>& p,
                                    const Tensor<T>& gy) {
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    Tensor<T> z({B, F});
    Tensor<T> gs({B, F});
    const double inv = 1.0 / (static_cast<double>(C) * Tt);
    for (int b = 0; b < B; ++b)
        for (int f = 0; f < F; ++f) {
            double zacc = 0.0, gacc = 0.0;
            for (int c = 0; c < C; ++c)
                for (int t = 0; t < Tt; ++t) {
                    zacc += static_cast<double>(x.at(b, c, f, t));
                    gacc += static_cast<double>(gy.at(b, c, f, t)) * x.at(b, c, f, t);
                }
            z.at(b, f) = static_cast<T>(zacc * inv);
            gs.at(b, f) = static_cast<T>(gacc);
        }
    const Tensor<T> s = detail::excite(z, p);
    SqueezeExciteGrads<T> g = detail::excite_backward(z, p, gs);
    const Tensor<T> gz = g.gx;
    g.gx = Tensor<T>(x.dims());
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f)
                for (int t = 0; t < Tt; ++t)
                    g.gx.at(b, c, f, t) =
                        gy.at(b, c, f, t) * s.at(b, f) + static_cast<T>(gz.at(b, f) * inv);
    return g;
}

// Per-frame frequency scale: z[b,t,f] = mean_c x[b,c,f,t]; excitation weights
// shared across frames.
template <typename T>
Tensor<T> tfwse_forward(const Tensor<T>& x, const SqueezeExciteParams<T>& p) {
    p.validate();
    if (x.ndim() != 4) throw std::invalid_argument("tfwse_forward: input must be 4D [B,C,F,T]");
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    if (F != p.dim()) throw std::invalid_argument("tfwse_forward: frequency extent mismatch");
    Tensor<T> z({B, Tt, F});
    const double inv = 1.0 / C;
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < Tt; ++t)
            for (int f = 0; f < F; ++f) {
                double acc = 0.0;
                for (int c = 0; c < C; ++c) acc += static_cast<double>(x.at(b, c, f, t));
                z.at(b, t, f) = static_cast<T>(acc * inv);
            }
    const Tensor<T> s = detail::excite(z, p);
    Tensor<T> y(x.dims());
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f)
                for (int t = 0; t < Tt; ++t) y.at(b, c, f, t) = s.at(b, t, f) * x.at(b, c, f, t);
    return y;
}

template <typename T>
SqueezeExciteGrads<T> tfwse_backward(const Tensor<T>& x, const SqueezeExciteParams<T>& p,
                                     const Tensor<T>& gy) {
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    Tensor<T> z({B, Tt, F});
    Tensor<T> gs({B, Tt, F});
    const double inv = 1.0 / C;
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < Tt; ++t)
            for (int f = 0; f < F; ++f) {
                double zacc = 0.0, gacc = 0.0;
                for (int c = 0; c < C; ++c) {
                    zacc += static_cast<double>(x.at(b, c, f, t));
                    gacc += static_cast<double>(gy.at(b, c, f, t)) * x.at(b, c, f, t);
                }
                z.at(b, t, f) = static_cast<T>(zacc * inv);
                gs.at(b, t, f) = static_cast<T>(gacc);
            }
    const Tensor<T> s = detail::excite(z, p);
    SqueezeExciteGrads<T> g = detail::excite_backward(z, p, gs);
    const Tensor<T> gz = g.gx;
    g.gx = Tensor<T>(x.dims());
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f)
                for (int t = 0; t < Tt; ++t)
                    g.gx.at(b, c, f, t) =
                        gy.at(b, c, f, t) * s.at(b, t, f) + static_cast<T>(gz.at(b, t, f) * inv);
    return g;
}

// Convolutional 2D attention: the time-pooled map over (channel, frequency)
// is treated as a one-channel image, passed through 1 -> hidden -> 1 same-pad
// convolutions with ReLU between and sigmoid after, and the result scales x.
template <typename T>
struct C2dAttParams {
    Tensor<T> conv1_w, conv1_b;  // [H,1,k,k], [H]
    Tensor<T> conv2_w, conv2_b;  // [1,H,k,k], [1]
    int hidden = 8;
    int kernel = 3;

    Conv2dSpec spec1() const {
        Conv2dSpec s;
        s.in_channels = 1;
        s.out_channels = hidden;
        s.kernel_h = s.kernel_w = kernel;
        s.pad_h = s.pad_w = (kernel - 1) / 2;
        return s;
    }
    Conv2dSpec spec2() const {
        Conv2dSpec s;
        s.in_channels = hidden;
        s.out_channels = 1;
        s.kernel_h = s.kernel_w = kernel;
        s.pad_h = s.pad_w = (kernel - 1) / 2;
        return s;
    }

    void validate() const {
        if (hidden < 1) throw std::invalid_argument("C2dAttParams: hidden must be >= 1");
        if (kernel < 1 || kernel % 2 == 0)
            throw std::invalid_argument("C2dAttParams: kernel must be odd and positive");
        ensure_shape(conv1_w, {hidden, 1, kernel, kernel}, "C2dAttParams conv1_w");
        ensure_shape(conv1_b, {hidden}, "C2dAttParams conv1_b");
        ensure_shape(conv2_w, {1, hidden, kernel, kernel}, "C2dAttParams conv2_w");
        ensure_shape(conv2_b, {1}, "C2dAttParams conv2_b");
    }

    long long param_count() const {
        return static_cast<long long>(conv1_w.numel()) + conv1_b.numel() + conv2_w.numel() +
               conv2_b.numel();
    }

    static C2dAttParams init(int hidden, int kernel, Rng& rng) {
        C2dAttParams p;
        p.hidden = hidden;
        p.kernel = kernel;
        const T a1 = static_cast<T>(std::sqrt(1.0 / (kernel * kernel)));
        const T a2 = static_cast<T>(std::sqrt(1.0 / (hidden * kernel * kernel)));
        p.conv1_w = Tensor<T>::random_uniform({hidden, 1, kernel, kernel}, rng, -a1, a1);
        p.conv1_b = Tensor<T>::random_uniform({hidden}, rng, -a1, a1);
        p.conv2_w = Tensor<T>::random_uniform({1, hidden, kernel, kernel}, rng, -a2, a2);
        p.conv2_b = Tensor<T>::random_uniform({1}, rng, -a2, a2);
        p.validate();
        return p;
    }

    static C2dAttParams zeros(int hidden, int kernel) {
        C2dAttParams p;
        p.hidden = hidden;
        p.kernel = kernel;
        p.conv1_w = Tensor<T>({hidden, 1, kernel, kernel});
        p.conv1_b = Tensor<T>({hidden});
        p.conv2_w = Tensor<T>({1, hidden, kernel, kernel});
        p.conv2_b = Tensor<T>({1});
        p.validate();
        return p;
    }
};

template <typename T>
struct C2dAttGrads {
    Tensor<T> gx, gconv1_w, gconv1_b, gconv2_w, gconv2_b;
};

namespace detail {

template <typename T>
Tensor<T> time_mean_map(const Tensor<T>& x) {
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    Tensor<T> m({B, 1, C, F});
    const double inv = 1.0 / Tt;
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f) {
                double acc = 0.0;
                for (int t = 0; t < Tt; ++t) acc += static_cast<double>(x.at(b, c, f, t));
                m.at(b, 0, c, f) = static_cast<T>(acc * inv);
            }
    return m;
}

}  // namespace detail

template <typename T>
Tensor<T> c2datt_forward(const Tensor<T>& x, const C2dAttParams<T>& p) {
    p.validate();
    if (x.ndim() != 4) throw std::invalid_argument("c2datt_forward: input must be 4D [B,C,F,T]");
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    const Conv2dSpec s1 = p.spec1(), s2 = p.spec2();
    if (C + 2 * s1.pad_h < p.kernel || F + 2 * s1.pad_w < p.kernel)
        throw std::invalid_argument("c2datt_forward: kernel larger than padded map");
    const Tensor<T> m = detail::time_mean_map(x);
    const Tensor<T> h = conv2d(m, p.conv1_w, &p.conv1_b, s1);
    const Tensor<T> s = sigmoid(conv2d(relu(h), p.conv2_w, &p.conv2_b, s2));
    Tensor<T> y(x.dims());
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f) {
                const T sv = s.at(b, 0, c, f);
                for (int t = 0; t < Tt; ++t) y.at(b, c, f, t) = sv * x.at(b, c, f, t);
            }
    return y;
}

template <typename T>
C2dAttGrads<T> c2datt_backward(const Tensor<T>& x, const C2dAttParams<T>& p, const Tensor<T>& gy) {
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    const Conv2dSpec s1 = p.spec1(), s2 = p.spec2();
    const Tensor<T> m = detail::time_mean_map(x);
    const Tensor<T> h = conv2d(m, p.conv1_w, &p.conv1_b, s1);
    const Tensor<T> a = relu(h);
    const Tensor<T> s = sigmoid(conv2d(a, p.conv2_w, &p.conv2_b, s2));

    Tensor<T> gs({B, 1, C, F});
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f) {
                double acc = 0.0;
                for (int t = 0; t < Tt; ++t)
                    acc += static_cast<double>(gy.at(b, c, f, t)) * x.at(b, c, f, t);
                gs.at(b, 0, c, f) = static_cast<T>(acc);
            }
    const Tensor<T> gh2 = sigmoid_backward(s, gs);
    ConvGrads<T> c2 = conv2d_backward(a, p.conv2_w, s2, gh2);
    const Tensor<T> gh1 = relu_backward(h, c2.gx);
    ConvGrads<T> c1 = conv2d_backward(m, p.conv1_w, s1, gh1);

    C2dAttGrads<T> g;
    g.gconv1_w = std::move(c1.gw);
    g.gconv1_b = std::move(c1.gb);
    g.gconv2_w = std::move(c2.gw);
    g.gconv2_b = std::move(c2.gb);
    g.gx = Tensor<T>(x.dims());
    const T inv = T(1) / static_cast<T>(Tt);
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f) {
                const T sv = s.at(b, 0, c, f);
                const T spread = c1.gx.at(b, 0, c, f) * inv;
                for (int t = 0; t < Tt; ++t)
                    g.gx.at(b, c, f, t) = gy.at(b, c, f, t) * sv + spread;
            }
    return g;
}

// Frequency-adaptive convolution: K basis kernels mixed per output frequency
// row by a softmax attention over K. The attention branch pools time, runs a
// same-padded width-3 convolution along frequency (C -> K), normalizes each
// K slice with stored stats, and softmaxes over K with temperature.
template <typename T>
struct FdyConvParams {
    Conv2dSpec spec;
    std::vector<Tensor<T>> basis_w;  // K entries, each [out,in,kh,kw]
    std::vector<Tensor<T>> basis_b;  // K entries, each [out]; empty if spec.bias is false
    Tensor<T> attn_w;                // [K, in, 3]
    Tensor<T> attn_b;                // [K]
    Tensor<T> norm_mean, norm_var;   // [K] each; stored stats, not trainable
    double temperature = 1.0;

    int basis_count() const { return static_cast<int>(basis_w.size()); }

    void validate() const {
        spec.validate();
        const int K = basis_count();
        if (K < 1) throw std::invalid_argument("FdyConvParams: basis count must be >= 1");
        if (temperature <= 0.0) throw std::invalid_argument("FdyConvParams: temperature must be > 0");
        for (const auto& w : basis_w)
            ensure_shape(w, {spec.out_channels, spec.in_channels, spec.kernel_h, spec.kernel_w},
                         "FdyConvParams basis weight");
        if (spec.bias) {
            if (static_cast<int>(basis_b.size()) != K)
                throw std::invalid_argument("FdyConvParams: basis bias count mismatch");
            for (const auto& b : basis_b) ensure_shape(b, {spec.out_channels}, "FdyConvParams basis bias");
        } else if (!basis_b.empty()) {
            throw std::invalid_argument("FdyConvParams: spec has no bias but biases given");
        }
        ensure_shape(attn_w, {K, spec.in_channels, 3}, "FdyConvParams attn_w");
        ensure_shape(attn_b, {K}, "FdyConvParams attn_b");
        ensure_shape(norm_mean, {K}, "FdyConvParams norm_mean");
        ensure_shape(norm_var, {K}, "FdyConvParams norm_var");
    }

    // Trainable parameters: basis kernels and the attention convolution. The
    // normalization stats are stored constants.
    long long param_count() const {
        const int K = basis_count();
        long long n = static_cast<long long>(K) * spec.weight_count();
        if (spec.bias) n += static_cast<long long>(K) * spec.out_channels;
        n += static_cast<long long>(attn_w.numel()) + attn_b.numel();
        return n;
    }

    static FdyConvParams init(const Conv2dSpec& spec, int K, double tau, Rng& rng) {
        if (K < 1) throw std::invalid_argument("FdyConvParams: basis count must be >= 1");
        FdyConvParams p;
        p.spec = spec;
        p.temperature = tau;
        const T a = static_cast<T>(std::sqrt(1.0 / (static_cast<double>(spec.in_channels) *
                                                    spec.kernel_h * spec.kernel_w)));
        for (int k = 0; k < K; ++k) {
            p.basis_w.push_back(Tensor<T>::random_uniform(
                {spec.out_channels, spec.in_channels, spec.kernel_h, spec.kernel_w}, rng, -a, a));
            if (spec.bias)
                p.basis_b.push_back(Tensor<T>::random_uniform({spec.out_channels}, rng, -a, a));
        }
        const T aa = static_cast<T>(std::sqrt(1.0 / (3.0 * spec.in_channels)));
        p.attn_w = Tensor<T>::random_uniform({K, spec.in_channels, 3}, rng, -aa, aa);
        p.attn_b = Tensor<T>::random_uniform({K}, rng, -aa, aa);
        p.norm_mean = Tensor<T>({K});
        p.norm_var = Tensor<T>({K}, T(1));
        p.validate();
        return p;
    }
};

template <typename T>
struct FdyGrads {
    Tensor<T> gx;
    std::vector<Tensor<T>> gbasis_w, gbasis_b;
    Tensor<T> gattn_w, gattn_b;
};

namespace detail {

// Attention weights pi[b,k,f] for the frequency-adaptive convolution.
template <typename T>
Tensor<T> fdy_attention(const Tensor<T>& x, const FdyConvParams<T>& p) {
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    const int K = p.basis_count();
    Tensor<T> m({B, C, F});
    const double inv = 1.0 / Tt;
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f) {
                double acc = 0.0;
                for (int t = 0; t < Tt; ++t) acc += static_cast<double>(x.at(b, c, f, t));
                m.at(b, c, f) = static_cast<T>(acc * inv);
            }
    Tensor<T> logits({B, K, F});
    for (int b = 0; b < B; ++b)
        for (int k = 0; k < K; ++k) {
            const double mu = static_cast<double>(p.norm_mean.at(k));
            const double denom = std::sqrt(static_cast<double>(p.norm_var.at(k)) + 1e-5);
            for (int f = 0; f < F; ++f) {
                double acc = static_cast<double>(p.attn_b.at(k));
                for (int c = 0; c < C; ++c)
                    for (int j = 0; j < 3; ++j) {
                        const int fi = f + j - 1;
                        if (fi < 0 || fi >= F) continue;
                        acc += static_cast<double>(p.attn_w.at(k, c, j)) * m.at(b, c, fi);
                    }
                logits.at(b, k, f) = static_cast<T>((acc - mu) / denom);
            }
        }
    return softmax(logits, 1, p.temperature);
}

}  // namespace detail

template <typename T>
Tensor<T> fdy_forward(const Tensor<T>& x, const FdyConvParams<T>& p, Tensor<T>* pi_out = nullptr) {
    p.validate();
    if (x.ndim() != 4) throw std::invalid_argument("fdy_forward: input must be 4D [B,C,F,T]");
    if (x.dim(1) != p.spec.in_channels) throw std::invalid_argument("fdy_forward: channel mismatch");
    ensure_finite(x, "fdy_forward input");
    const int B = x.dim(0), F = x.dim(2), Tt = x.dim(3);
    const int K = p.basis_count();
    const Conv2dSpec& s = p.spec;
    const int fo_n = s.out_extent_h(F), to_n = s.out_extent_w(Tt);
    if (fo_n != F)
        throw std::invalid_argument(
            "fdy_forward: output frequency extent must equal input (same-padded, stride 1 along frequency)");
    if (to_n < 1) throw std::invalid_argument("fdy_forward: output time extent < 1");

    const Tensor<T> pi = detail::fdy_attention(x, p);
    if (pi_out) *pi_out = pi;

    Tensor<T> y({B, s.out_channels, fo_n, to_n});
    const std::size_t w_numel = p.basis_w[0].numel();
    std::vector<T> w_eff(w_numel);
    std::vector<T> b_eff(static_cast<std::size_t>(s.out_channels));
    const std::size_t k_dim = static_cast<std::size_t>(s.in_channels) * s.kernel_h * s.kernel_w;
    std::vector<T> patch(k_dim * static_cast<std::size_t>(to_n));
    for (int b = 0; b < B; ++b)
        for (int fo = 0; fo < fo_n; ++fo) {
            std::fill(w_eff.begin(), w_eff.end(), T(0));
            std::fill(b_eff.begin(), b_eff.end(), T(0));
            for (int k = 0; k < K; ++k) {
                const T pv = pi.at(b, k, fo);
                const T* wk = p.basis_w[static_cast<std::size_t>(k)].data();
                for (std::size_t i = 0; i < w_numel; ++i) w_eff[i] += pv * wk[i];
                if (s.bias) {
                    const T* bk = p.basis_b[static_cast<std::size_t>(k)].data();
                    for (int oc = 0; oc < s.out_channels; ++oc) b_eff[oc] += pv * bk[oc];
                }
            }
            detail::gather_patch_row(x, b, s, fo, to_n, patch);
            detail::conv2d_row(w_eff.data(), s.bias ? b_eff.data() : nullptr, s, fo, to_n, patch, y, b);
        }
    return y;
}

// Backward decomposes the output as y = sum_k pi_k * conv_k(x), which makes
// the kernel-mixing gradient a sum of plain convolution VJPs.
template <typename T>
FdyGrads<T> fdy_backward(const Tensor<T>& x, const FdyConvParams<T>& p, const Tensor<T>& gy) {
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    const int K = p.basis_count();
    const Conv2dSpec& s = p.spec;
    const int to_n = s.out_extent_w(Tt);
    ensure_shape(gy, {B, s.out_channels, F, to_n}, "fdy_backward upstream");

    const Tensor<T> pi = detail::fdy_attention(x, p);
    FdyGrads<T> g;
    g.gx = Tensor<T>(x.dims());
    g.gattn_w = Tensor<T>(p.attn_w.dims());
    g.gattn_b = Tensor<T>(p.attn_b.dims());

    Tensor<T> gpi({B, K, F});
    for (int k = 0; k < K; ++k) {
        const Tensor<T> yk = conv2d(x, p.basis_w[static_cast<std::size_t>(k)],
                                    s.bias ? &p.basis_b[static_cast<std::size_t>(k)] : nullptr, s);
        Tensor<T> gyk(gy.dims());
        for (int b = 0; b < B; ++b)
            for (int oc = 0; oc < s.out_channels; ++oc)
                for (int fo = 0; fo < F; ++fo) {
                    const T pv = pi.at(b, k, fo);
                    double acc = 0.0;
                    for (int to = 0; to < to_n; ++to) {
                        const T gv = gy.at(b, oc, fo, to);
                        gyk.at(b, oc, fo, to) = gv * pv;
                        acc += static_cast<double>(gv) * yk.at(b, oc, fo, to);
                    }
                    gpi.at(b, k, fo) += static_cast<T>(acc);
                }
        ConvGrads<T> ck = conv2d_backward(x, p.basis_w[static_cast<std::size_t>(k)], s, gyk);
        for (std::size_t i = 0; i < g.gx.numel(); ++i) g.gx[i] += ck.gx[i];
        g.gbasis_w.push_back(std::move(ck.gw));
        if (s.bias) g.gbasis_b.push_back(std::move(ck.gb));
    }

    // Through the attention branch: softmax, normalization, width-3 conv, time mean.
    const Tensor<T> gln = softmax_backward(pi, 1, p.temperature, gpi);
    Tensor<T> gm({B, C, F});
    Tensor<T> m({B, C, F});
    const double inv_t = 1.0 / Tt;
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f) {
                double acc = 0.0;
                for (int t = 0; t < Tt; ++t) acc += static_cast<double>(x.at(b, c, f, t));
                m.at(b, c, f) = static_cast<T>(acc * inv_t);
            }
    for (int b = 0; b < B; ++b)
        for (int k = 0; k < K; ++k) {
            const T denom = static_cast<T>(std::sqrt(static_cast<double>(p.norm_var.at(k)) + 1e-5));
            for (int f = 0; f < F; ++f) {
                const T gl = gln.at(b, k, f) / denom;
                g.gattn_b.at(k) += gl;
                for (int c = 0; c < C; ++c)
                    for (int j = 0; j < 3; ++j) {
                        const int fi = f + j - 1;
                        if (fi < 0 || fi >= F) continue;
                        g.gattn_w.at(k, c, j) += gl * m.at(b, c, fi);
                        gm.at(b, c, fi) += gl * p.attn_w.at(k, c, j);
                    }
            }
        }
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int f = 0; f < F; ++f) {
                const T spread = static_cast<T>(gm.at(b, c, f) * inv_t);
                for (int t = 0; t < Tt; ++t) g.gx.at(b, c, f, t) += spread;
            }
    return g;
}

// Scale-attention variants that can attach inside a host network. The
// frequency-adaptive convolution is not listed here: it replaces the host's
// convolution rather than scaling its output.
enum class AttentionKind { se, tse, fwse, tfwse, c2datt };

inline std::string attention_kind_name(AttentionKind k) {
    switch (k) {
        case AttentionKind::se: return "se";
        case AttentionKind::tse: return "tse";
        case AttentionKind::fwse: return "fwse";
        case AttentionKind::tfwse: return "tfwse";
        case AttentionKind::c2datt: return "c2datt";
    }
    throw std::invalid_argument("attention_kind_name: unknown kind");
}

template <typename T>
struct AttentionModule {
    AttentionKind kind = AttentionKind::se;
    SqueezeExciteParams<T> se;  // se / tse / fwse / tfwse
    C2dAttParams<T> c2d;        // c2datt

    long long param_count() const {
        return kind == AttentionKind::c2datt ? c2d.param_count() : se.param_count();
    }
};

template <typename T>
Tensor<T> attention_forward(const Tensor<T>& x, const AttentionModule<T>& m) {
    switch (m.kind) {
        case AttentionKind::se: return se_forward(x, m.se);
        case AttentionKind::tse: return tse_forward(x, m.se);
        case AttentionKind::fwse: return fwse_forward(x, m.se);
        case AttentionKind::tfwse: return tfwse_forward(x, m.se);
        case AttentionKind::c2datt: return c2datt_forward(x, m.c2d);
    }
    throw std::invalid_argument("attention_forward: unknown kind");
}

// Functional composition in list order; empty chain is the identity.
template <typename T>
Tensor<T> chain(const std::vector<AttentionModule<T>>& modules, const Tensor<T>& x) {
    Tensor<T> y = x;
    for (const auto& m : modules) y = attention_forward(y, m);
    return y;
}

// Closed-form added-parameter counts per attach point.
inline long long se_param_count(int c, int r) {
    if (r < 1 || c % r != 0) throw std::invalid_argument("se_param_count: r must divide C");
    return 2LL * c * (c / r);
}

inline long long fwse_param_count(int f, int r) {
    if (r < 1 || f % r != 0) throw std::invalid_argument("fwse_param_count: r must divide F");
    return 2LL * f * (f / r);
}

inline long long c2datt_param_count(int hidden = 8, int kernel = 3) {
    const long long kk = static_cast<long long>(kernel) * kernel;
    return hidden * kk + hidden + hidden * kk + 1;
}

inline long long fdy_param_count(const Conv2dSpec& spec, int k_basis) {
    if (k_basis < 1) throw std::invalid_argument("fdy_param_count: basis count must be >= 1");
    long long n = static_cast<long long>(k_basis) * spec.param_count();
    n += static_cast<long long>(k_basis) * spec.in_channels * 3;  // attention conv weights
    n += k_basis;                                                 // attention conv bias
    return n;
}

struct ParamCountBreakdown {
    std::vector<long long> per_attach;
    long long total = 0;
};

// Added parameters for a scale-attention variant over the host's attach
// points, each given as (channel extent, frequency extent at that point).
inline ParamCountBreakdown param_count(AttentionKind kind,
                                       const std::vector<std::pair<int, int>>& attach_points,
                                       int r = 4) {
    ParamCountBreakdown out;
    for (const auto& [c, f] : attach_points) {
        long long n = 0;
        switch (kind) {
            case AttentionKind::se:
            case AttentionKind::tse: n = se_param_count(c, r); break;
            case AttentionKind::fwse:
            case AttentionKind::tfwse: n = fwse_param_count(f, r); break;
            case AttentionKind::c2datt: n = c2datt_param_count(); break;
        }
        out.per_attach.push_back(n);
        out.total += n;
    }
    return out;
}

}  // namespace sedkit
