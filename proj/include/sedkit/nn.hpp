#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sedkit/tensor.hpp"

namespace sedkit {

// 2D convolution geometry over the [batch, channel, frequency, time] layout.
// The spatial axes are (frequency, time), named (h, w) here. Convolution is
// cross-correlation: no kernel flip.
struct Conv2dSpec {
    int in_channels = 1;
    int out_channels = 1;
    int kernel_h = 3;
    int kernel_w = 3;
    int stride_h = 1;
    int stride_w = 1;
    int pad_h = 0;
    int pad_w = 0;
    bool bias = true;

    int out_extent_h(int in) const { return (in + 2 * pad_h - kernel_h) / stride_h + 1; }
    int out_extent_w(int in) const { return (in + 2 * pad_w - kernel_w) / stride_w + 1; }

    long long weight_count() const {
        return static_cast<long long>(out_channels) * in_channels * kernel_h * kernel_w;
    }
    long long param_count() const { return weight_count() + (bias ? out_channels : 0); }

    void validate() const {
        if (in_channels < 1 || out_channels < 1) throw std::invalid_argument("Conv2dSpec: channels must be positive");
        if (kernel_h < 1 || kernel_w < 1) throw std::invalid_argument("Conv2dSpec: kernel extents must be positive");
        if (stride_h < 1 || stride_w < 1) throw std::invalid_argument("Conv2dSpec: strides must be positive");
        if (pad_h < 0 || pad_w < 0) throw std::invalid_argument("Conv2dSpec: padding must be non-negative");
    }
};

inline Conv2dSpec conv3x3_same(int in_channels, int out_channels) {
    Conv2dSpec s;
    s.in_channels = in_channels;
    s.out_channels = out_channels;
    s.kernel_h = s.kernel_w = 3;
    s.pad_h = s.pad_w = 1;
    return s;
}

namespace detail {

// Gathers the zero-padded im2col patch matrix for one output frequency row:
// patch[k * t_out + t] where k runs over (ic, kh, kw) in row-major order.
template <typename T>
void gather_patch_row(const Tensor<T>& x, int b, const Conv2dSpec& s, int fo, int t_out,
                      std::vector<T>& patch) {
    const int C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    const std::size_t t_len = static_cast<std::size_t>(t_out);
    std::size_t k = 0;
    for (int ic = 0; ic < C; ++ic) {
        for (int kh = 0; kh < s.kernel_h; ++kh) {
            const int fi = fo * s.stride_h - s.pad_h + kh;
            if (fi < 0 || fi >= F) {
                for (int kw = 0; kw < s.kernel_w; ++kw, ++k)
                    std::fill_n(patch.begin() + static_cast<std::ptrdiff_t>(k * t_len), t_len, T(0));
                continue;
            }
            const T* row = &x.at(b, ic, fi, 0);
            for (int kw = 0; kw < s.kernel_w; ++kw, ++k) {
                T* dst = patch.data() + k * t_len;
                for (int to = 0; to < t_out; ++to) {
                    const int ti = to * s.stride_w - s.pad_w + kw;
                    dst[to] = (ti >= 0 && ti < Tt) ? row[ti] : T(0);
                }
            }
        }
    }
}

// One output frequency row for every (out channel, out time) given a kernel.
// Shared by the plain convolution and the frequency-adaptive convolution so
// that identical kernels produce bitwise-identical rows.
template <typename T>
void conv2d_row(const T* w, const T* bias, const Conv2dSpec& s, int fo, int t_out,
                const std::vector<T>& patch, Tensor<T>& y, int b) {
    const std::size_t k_dim = static_cast<std::size_t>(s.in_channels) * s.kernel_h * s.kernel_w;
    const std::size_t t_len = static_cast<std::size_t>(t_out);
    for (int oc = 0; oc < s.out_channels; ++oc) {
        T* out = &y.at(b, oc, fo, 0);
        std::fill_n(out, t_len, bias ? bias[oc] : T(0));
        const T* wrow = w + static_cast<std::size_t>(oc) * k_dim;
        for (std::size_t k = 0; k < k_dim; ++k) {
            const T wv = wrow[k];
            const T* src = patch.data() + k * t_len;
            for (int to = 0; to < t_out; ++to) out[to] += wv * src[to];
        }
    }
}

}  // namespace detail

// Cross-correlation of x[B,C,F,T] with w[out,in,kh,kw]; output extents are
// floor((in + 2*pad - kernel)/stride) + 1 and must be >= 1.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* b, const Conv2dSpec& s) {
    s.validate();
    if (x.ndim() != 4) throw std::invalid_argument("conv2d: input must be 4D [B,C,F,T]");
    if (x.dim(1) != s.in_channels) throw std::invalid_argument("conv2d: input channel mismatch");
    ensure_shape(w, {s.out_channels, s.in_channels, s.kernel_h, s.kernel_w}, "conv2d weights");
    if (s.bias) {
        if (b == nullptr) throw std::invalid_argument("conv2d: spec has bias but none given");
        ensure_shape(*b, {s.out_channels}, "conv2d bias");
    }
    ensure_finite(x, "conv2d input");
    const int B = x.dim(0), F = x.dim(2), Tt = x.dim(3);
    const int fo_n = s.out_extent_h(F), to_n = s.out_extent_w(Tt);
    if (fo_n < 1 || to_n < 1) throw std::invalid_argument("conv2d: output extent < 1");

    Tensor<T> y({B, s.out_channels, fo_n, to_n});
    const std::size_t k_dim = static_cast<std::size_t>(s.in_channels) * s.kernel_h * s.kernel_w;
    std::vector<T> patch(k_dim * static_cast<std::size_t>(to_n));
    const T* bias = s.bias ? b->data() : nullptr;
    for (int bi = 0; bi < B; ++bi) {
        for (int fo = 0; fo < fo_n; ++fo) {
            detail::gather_patch_row(x, bi, s, fo, to_n, patch);
            detail::conv2d_row(w.data(), bias, s, fo, to_n, patch, y, bi);
        }
    }
    return y;
}

template <typename T>
struct ConvGrads {
    Tensor<T> gx, gw, gb;
};

// Vector-Jacobian products of conv2d. Plain loops; used on verification paths.
template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Conv2dSpec& s,
                             const Tensor<T>& gy) {
    const int B = x.dim(0), F = x.dim(2), Tt = x.dim(3);
    const int fo_n = s.out_extent_h(F), to_n = s.out_extent_w(Tt);
    ensure_shape(gy, {B, s.out_channels, fo_n, to_n}, "conv2d_backward upstream");
    ConvGrads<T> g;
    g.gx = Tensor<T>(x.dims());
    g.gw = Tensor<T>(w.dims());
    g.gb = Tensor<T>({s.out_channels});
    for (int b = 0; b < B; ++b)
        for (int oc = 0; oc < s.out_channels; ++oc)
            for (int fo = 0; fo < fo_n; ++fo)
                for (int to = 0; to < to_n; ++to) {
                    const T gv = gy.at(b, oc, fo, to);
                    g.gb.at(oc) += gv;
                    for (int ic = 0; ic < s.in_channels; ++ic)
                        for (int kh = 0; kh < s.kernel_h; ++kh) {
                            const int fi = fo * s.stride_h - s.pad_h + kh;
                            if (fi < 0 || fi >= F) continue;
                            for (int kw = 0; kw < s.kernel_w; ++kw) {
                                const int ti = to * s.stride_w - s.pad_w + kw;
                                if (ti < 0 || ti >= Tt) continue;
                                g.gw.at(oc, ic, kh, kw) += gv * x.at(b, ic, fi, ti);
                                g.gx.at(b, ic, fi, ti) += gv * w.at(oc, ic, kh, kw);
                            }
                        }
                }
    return g;
}

// Affine map along the last axis: y[..., o] = b[o] + sum_i x[..., i] * w[o, i].
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* b) {
    if (w.ndim() != 2) throw std::invalid_argument("linear: weight must be 2D [out,in]");
    const int d_in = w.dim(1), d_out = w.dim(0);
    if (x.dim(x.ndim() - 1) != d_in) throw std::invalid_argument("linear: trailing extent mismatch");
    if (b != nullptr) ensure_shape(*b, {d_out}, "linear bias");
    ensure_finite(x, "linear input");
    std::vector<int> out_dims = x.dims();
    out_dims.back() = d_out;
    Tensor<T> y(out_dims);
    const std::size_t rows = x.numel() / static_cast<std::size_t>(d_in);
    for (std::size_t r = 0; r < rows; ++r) {
        const T* xr = x.data() + r * static_cast<std::size_t>(d_in);
        T* yr = y.data() + r * static_cast<std::size_t>(d_out);
        for (int o = 0; o < d_out; ++o) {
            T acc = b ? b->at(o) : T(0);
            const T* wr = &w.at(o, 0);
            for (int i = 0; i < d_in; ++i) acc += xr[i] * wr[i];
            yr[o] = acc;
        }
    }
    return y;
}

template <typename T>
struct LinearGrads {
    Tensor<T> gx, gw, gb;
};

template <typename T>
LinearGrads<T> linear_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& gy) {
    const int d_in = w.dim(1), d_out = w.dim(0);
    LinearGrads<T> g;
    g.gx = Tensor<T>(x.dims());
    g.gw = Tensor<T>(w.dims());
    g.gb = Tensor<T>({d_out});
    const std::size_t rows = x.numel() / static_cast<std::size_t>(d_in);
    for (std::size_t r = 0; r < rows; ++r) {
        const T* xr = x.data() + r * static_cast<std::size_t>(d_in);
        const T* gyr = gy.data() + r * static_cast<std::size_t>(d_out);
        T* gxr = g.gx.data() + r * static_cast<std::size_t>(d_in);
        for (int o = 0; o < d_out; ++o) {
            const T gv = gyr[o];
            g.gb.at(o) += gv;
            const T* wr = &w.at(o, 0);
            T* gwr = &g.gw.at(o, 0);
            for (int i = 0; i < d_in; ++i) {
                gxr[i] += gv * wr[i];
                gwr[i] += gv * xr[i];
            }
        }
    }
    return g;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
    Tensor<T> y = x;
    for (auto& v : y.vec()) v = v > T(0) ? v : T(0);
    return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& gy) {
    Tensor<T> gx = gy;
    for (std::size_t i = 0; i < gx.numel(); ++i)
        if (x[i] <= T(0)) gx[i] = T(0);
    return gx;
}

// Scalar sigmoid, saturated to the nearest representable value inside (0,1)
// so outputs stay strictly inside the open interval for all finite inputs.
template <typename T>
T sigmoid_scalar(T x) {
    T y;
    if (x >= T(0)) {
        y = T(1) / (T(1) + std::exp(-x));
    } else {
        const T e = std::exp(x);
        y = e / (T(1) + e);
    }
    const T lo = std::numeric_limits<T>::denorm_min();
    const T hi = T(1) - std::numeric_limits<T>::epsilon() / T(2);
    return std::min(std::max(y, lo), hi);
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
    Tensor<T> y = x;
    for (auto& v : y.vec()) v = sigmoid_scalar(v);
    return y;
}

// Takes the forward output y = sigmoid(x).
template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& y, const Tensor<T>& gy) {
    Tensor<T> gx = gy;
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] *= y[i] * (T(1) - y[i]);
    return gx;
}

// Softmax of x / temperature along `axis`. Max-subtracted for stability;
// sums to 1 along the axis.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, int axis, double temperature = 1.0) {
    if (temperature <= 0.0) throw std::invalid_argument("softmax: temperature must be > 0");
    if (axis < 0 || axis >= x.ndim()) throw std::invalid_argument("softmax: bad axis");
    ensure_finite(x, "softmax input");
    Tensor<T> y(x.dims());
    const int n = x.dim(axis);
    std::size_t inner = 1;
    for (int a = axis + 1; a < x.ndim(); ++a) inner *= static_cast<std::size_t>(x.dim(a));
    const std::size_t outer = x.numel() / (inner * static_cast<std::size_t>(n));
    const T tau = static_cast<T>(temperature);
    for (std::size_t ou = 0; ou < outer; ++ou) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = ou * inner * static_cast<std::size_t>(n) + in;
            T m = x[base];
            for (int i = 1; i < n; ++i) m = std::max(m, x[base + static_cast<std::size_t>(i) * inner]);
            T sum = T(0);
            for (int i = 0; i < n; ++i) {
                const std::size_t idx = base + static_cast<std::size_t>(i) * inner;
                const T e = std::exp((x[idx] - m) / tau);
                y[idx] = e;
                sum += e;
            }
            for (int i = 0; i < n; ++i) y[base + static_cast<std::size_t>(i) * inner] /= sum;
        }
    }
    return y;
}

// Takes the forward output y = softmax(x, axis, temperature).
template <typename T>
Tensor<T> softmax_backward(const Tensor<T>& y, int axis, double temperature, const Tensor<T>& gy) {
    Tensor<T> gx(y.dims());
    const int n = y.dim(axis);
    std::size_t inner = 1;
    for (int a = axis + 1; a < y.ndim(); ++a) inner *= static_cast<std::size_t>(y.dim(a));
    const std::size_t outer = y.numel() / (inner * static_cast<std::size_t>(n));
    const T tau = static_cast<T>(temperature);
    for (std::size_t ou = 0; ou < outer; ++ou)
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = ou * inner * static_cast<std::size_t>(n) + in;
            T dot = T(0);
            for (int i = 0; i < n; ++i) {
                const std::size_t idx = base + static_cast<std::size_t>(i) * inner;
                dot += gy[idx] * y[idx];
            }
            for (int i = 0; i < n; ++i) {
                const std::size_t idx = base + static_cast<std::size_t>(i) * inner;
                gx[idx] = y[idx] * (gy[idx] - dot) / tau;
            }
        }
    return gx;
}

// Mean pooling over non-overlapping (pool_f, pool_t) windows. Non-divisible
// trailing rows/cols are truncated (floor semantics). Window sums accumulate
// in double so constant windows pool to their exact value.
template <typename T>
Tensor<T> avg_pool2d(const Tensor<T>& x, int pool_f, int pool_t) {
    if (pool_f < 1 || pool_t < 1) throw std::invalid_argument("avg_pool2d: pool sizes must be >= 1");
    if (x.ndim() != 4) throw std::invalid_argument("avg_pool2d: input must be 4D [B,C,F,T]");
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), Tt = x.dim(3);
    const int Fo = F / pool_f, To = Tt / pool_t;
    if (Fo < 1 || To < 1) throw std::invalid_argument("avg_pool2d: pooled extent < 1");
    Tensor<T> y({B, C, Fo, To});
    const double inv = 1.0 / (static_cast<double>(pool_f) * pool_t);
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int fo = 0; fo < Fo; ++fo)
                for (int to = 0; to < To; ++to) {
                    double acc = 0.0;
                    for (int i = 0; i < pool_f; ++i)
                        for (int j = 0; j < pool_t; ++j)
                            acc += static_cast<double>(x.at(b, c, fo * pool_f + i, to * pool_t + j));
                    y.at(b, c, fo, to) = static_cast<T>(acc * inv);
                }
    return y;
}

template <typename T>
Tensor<T> avg_pool2d_backward(const std::vector<int>& x_dims, int pool_f, int pool_t,
                              const Tensor<T>& gy) {
    Tensor<T> gx(x_dims);
    const int B = x_dims[0], C = x_dims[1];
    const int Fo = gy.dim(2), To = gy.dim(3);
    const T inv = T(1) / static_cast<T>(pool_f * pool_t);
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int fo = 0; fo < Fo; ++fo)
                for (int to = 0; to < To; ++to) {
                    const T g = gy.at(b, c, fo, to) * inv;
                    for (int i = 0; i < pool_f; ++i)
                        for (int j = 0; j < pool_t; ++j)
                            gx.at(b, c, fo * pool_f + i, to * pool_t + j) += g;
                }
    return gx;
}

// Inference-mode batch normalization: per-channel affine with stored stats.
template <typename T>
Tensor<T> batchnorm_infer(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                          const Tensor<T>& mean, const Tensor<T>& var, double eps = 1e-5) {
    if (x.ndim() != 4) throw std::invalid_argument("batchnorm_infer: input must be 4D [B,C,F,T]");
    const int C = x.dim(1);
    ensure_shape(gamma, {C}, "batchnorm gamma");
    ensure_shape(beta, {C}, "batchnorm beta");
    ensure_shape(mean, {C}, "batchnorm mean");
    ensure_shape(var, {C}, "batchnorm var");
    Tensor<T> y(x.dims());
    const std::size_t plane = x.numel() / (static_cast<std::size_t>(x.dim(0)) * C);
    for (int b = 0; b < x.dim(0); ++b)
        for (int c = 0; c < C; ++c) {
            const T scale = gamma.at(c) / static_cast<T>(std::sqrt(static_cast<double>(var.at(c)) + eps));
            const T shift = beta.at(c) - mean.at(c) * scale;
            const T* src = &x.at(b, c, 0, 0);
            T* dst = &y.at(b, c, 0, 0);
            for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] * scale + shift;
        }
    return y;
}

// Central-difference gradient of a scalar function. 64-bit only; the step is
// scaled per element by max(1, |x_i|).
inline TensorD finite_diff_grad(const std::function<double(const TensorD&)>& f, const TensorD& x,
                                double eps) {
    if (eps <= 0.0) throw std::invalid_argument("finite_diff_grad: eps must be > 0");
    TensorD grad(x.dims());
    TensorD probe = x;
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const double h = eps * std::max(1.0, std::fabs(x[i]));
        const double saved = probe[i];
        probe[i] = saved + h;
        const double fp = f(probe);
        probe[i] = saved - h;
        const double fm = f(probe);
        probe[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("finite_diff_grad: non-finite function evaluation");
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

}  // namespace sedkit
