#include "sedkit/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>

#include "sedkit/attention.hpp"
#include "sedkit/nn.hpp"
#include "sedkit/rng.hpp"
#include "sedkit/tensor.hpp"

namespace sedkit {
namespace {

constexpr double kFdEps = 1e-6;

std::uint64_t mix_seed(std::uint64_t seed, const std::string& name) {
    // FNV-1a over the check name keeps per-check streams independent of the
    // order checks run in, and stable across platforms.
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h ^ seed;
}

double max_abs(const TensorD& t) {
    double m = 0.0;
    for (double v : t.vec()) m = std::max(m, std::abs(v));
    return m;
}

double rel_err(const TensorD& analytic, const TensorD& fd) {
    if (!analytic.same_shape(fd)) throw std::logic_error("rel_err: shape mismatch");
    double diff = 0.0;
    for (std::size_t i = 0; i < analytic.numel(); ++i)
        diff = std::max(diff, std::abs(analytic.vec()[i] - fd.vec()[i]));
    return diff / std::max({max_abs(analytic), max_abs(fd), 1e-12});
}

double dot(const TensorD& u, const TensorD& y) {
    if (!u.same_shape(y)) throw std::logic_error("gradcheck loss: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < u.numel(); ++i) acc += u.vec()[i] * y.vec()[i];
    return acc;
}

// Central differences on `var` against the analytic gradient, restoring the
// tensor afterwards. `loss` must read `var` afresh on every call.
double fd_check(TensorD& var, const TensorD& analytic, const std::function<double()>& loss) {
    const TensorD saved = var;
    const TensorD fd = finite_diff_grad(
        [&](const TensorD& v) {
            var = v;
            return loss();
        },
        saved, kFdEps);
    var = saved;
    return rel_err(analytic, fd);
}

// Keeps rectifier inputs away from the kink so the finite-difference step
// cannot cross it.
void nudge_from_zero(TensorD& t, double margin = 0.05) {
    for (double& v : t.vec()) {
        if (std::abs(v) < margin) v = (v >= 0.0 ? margin : -margin) + v;
    }
}

int draw_dim(Rng& rng, int lo, int hi) {
    return lo + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(hi - lo + 1)));
}

double check_conv(Rng& rng) {
    Conv2dSpec s;
    s.in_channels = draw_dim(rng, 1, 3);
    s.out_channels = draw_dim(rng, 1, 3);
    s.kernel_h = 1 + 2 * draw_dim(rng, 0, 1);
    s.kernel_w = 3;
    s.stride_h = draw_dim(rng, 1, 2);
    s.stride_w = 1;
    s.pad_h = draw_dim(rng, 0, 1);
    s.pad_w = 1;
    const int B = draw_dim(rng, 1, 2);
    const int F = s.kernel_h + draw_dim(rng, 1, 3);
    const int T = draw_dim(rng, 4, 6);
    TensorD x = TensorD::random_uniform({B, s.in_channels, F, T}, rng, -1.0, 1.0);
    TensorD w = TensorD::random_uniform({s.out_channels, s.in_channels, s.kernel_h, s.kernel_w},
                                        rng, -1.0, 1.0);
    TensorD b = TensorD::random_uniform({s.out_channels}, rng, -1.0, 1.0);
    const TensorD u = TensorD::random_uniform(
        {B, s.out_channels, s.out_extent_h(F), s.out_extent_w(T)}, rng, -1.0, 1.0);
    const auto loss = [&]() { return dot(u, conv2d(x, w, &b, s)); };
    const ConvGrads<double> g = conv2d_backward(x, w, s, u);
    double e = fd_check(x, g.gx, loss);
    e = std::max(e, fd_check(w, g.gw, loss));
    e = std::max(e, fd_check(b, g.gb, loss));
    return e;
}

double check_linear(Rng& rng) {
    const int B = draw_dim(rng, 1, 2);
    const int M = draw_dim(rng, 2, 4);
    const int din = draw_dim(rng, 2, 5);
    const int dout = draw_dim(rng, 2, 5);
    TensorD x = TensorD::random_uniform({B, M, din}, rng, -1.0, 1.0);
    TensorD w = TensorD::random_uniform({dout, din}, rng, -1.0, 1.0);
    TensorD b = TensorD::random_uniform({dout}, rng, -1.0, 1.0);
    const TensorD u = TensorD::random_uniform({B, M, dout}, rng, -1.0, 1.0);
    const auto loss = [&]() { return dot(u, linear(x, w, &b)); };
    const LinearGrads<double> g = linear_backward(x, w, u);
    double e = fd_check(x, g.gx, loss);
    e = std::max(e, fd_check(w, g.gw, loss));
    e = std::max(e, fd_check(b, g.gb, loss));
    return e;
}

double check_activations(Rng& rng) {
    const int B = draw_dim(rng, 2, 3);
    const int M = draw_dim(rng, 3, 5);
    const int N = draw_dim(rng, 3, 5);
    double worst = 0.0;
    {
        TensorD x = TensorD::random_uniform({B, M, N}, rng, -1.0, 1.0);
        nudge_from_zero(x);
        const TensorD u = TensorD::random_uniform({B, M, N}, rng, -1.0, 1.0);
        const auto loss = [&]() { return dot(u, relu(x)); };
        worst = std::max(worst, fd_check(x, relu_backward(x, u), loss));
    }
    {
        TensorD x = TensorD::random_uniform({B, M, N}, rng, -2.0, 2.0);
        const TensorD u = TensorD::random_uniform({B, M, N}, rng, -1.0, 1.0);
        const auto loss = [&]() { return dot(u, sigmoid(x)); };
        worst = std::max(worst, fd_check(x, sigmoid_backward(sigmoid(x), u), loss));
    }
    {
        TensorD x = TensorD::random_uniform({B, M, N}, rng, -2.0, 2.0);
        const int axis = draw_dim(rng, 0, 2);
        const double tau = (rng.uniform() < 0.5) ? 1.0 : 0.7;
        const TensorD u = TensorD::random_uniform({B, M, N}, rng, -1.0, 1.0);
        const auto loss = [&]() { return dot(u, softmax(x, axis, tau)); };
        worst = std::max(worst, fd_check(x, softmax_backward(softmax(x, axis, tau), axis, tau, u), loss));
    }
    return worst;
}

double check_pool(Rng& rng) {
    const int B = draw_dim(rng, 1, 2);
    const int C = draw_dim(rng, 1, 3);
    const int F = draw_dim(rng, 3, 6);
    const int T = draw_dim(rng, 3, 6);
    const int pf = draw_dim(rng, 1, std::min(3, F));
    const int pt = draw_dim(rng, 1, std::min(3, T));
    TensorD x = TensorD::random_uniform({B, C, F, T}, rng, -1.0, 1.0);
    const TensorD u = TensorD::random_uniform({B, C, F / pf, T / pt}, rng, -1.0, 1.0);
    const auto loss = [&]() { return dot(u, avg_pool2d(x, pf, pt)); };
    return fd_check(x, avg_pool2d_backward(x.dims(), pf, pt, u), loss);
}

enum class SeKind { se, tse, fwse, tfwse };

double check_se_family(SeKind kind, Rng& rng) {
    const int B = draw_dim(rng, 1, 2);
    const int gated = 2 * draw_dim(rng, 1, 4);  // reduction 2 must divide it
    int C, F;
    if (kind == SeKind::se || kind == SeKind::tse) {
        C = gated;
        F = draw_dim(rng, 2, 5);
    } else {
        F = gated;
        C = draw_dim(rng, 2, 5);
    }
    const int T = draw_dim(rng, 2, 5);
    SqueezeExciteParams<double> p = SqueezeExciteParams<double>::init(gated, 2, rng);
    TensorD x = TensorD::random_uniform({B, C, F, T}, rng, -1.0, 1.0);
    const TensorD u = TensorD::random_uniform({B, C, F, T}, rng, -1.0, 1.0);
    const auto fwd = [&]() {
        switch (kind) {
            case SeKind::se: return se_forward(x, p);
            case SeKind::tse: return tse_forward(x, p);
            case SeKind::fwse: return fwse_forward(x, p);
            default: return tfwse_forward(x, p);
        }
    };
    const auto loss = [&]() { return dot(u, fwd()); };
    SqueezeExciteGrads<double> g;
    switch (kind) {
        case SeKind::se: g = se_backward(x, p, u); break;
        case SeKind::tse: g = tse_backward(x, p, u); break;
        case SeKind::fwse: g = fwse_backward(x, p, u); break;
        default: g = tfwse_backward(x, p, u); break;
    }
    double e = fd_check(x, g.gx, loss);
    e = std::max(e, fd_check(p.w1, g.gw1, loss));
    e = std::max(e, fd_check(p.w2, g.gw2, loss));
    return e;
}

double check_c2datt(Rng& rng) {
    const int B = draw_dim(rng, 1, 2);
    const int C = draw_dim(rng, 3, 6);
    const int F = draw_dim(rng, 3, 6);
    const int T = draw_dim(rng, 2, 4);
    const int hidden = 2 * draw_dim(rng, 1, 2);
    C2dAttParams<double> p = C2dAttParams<double>::init(hidden, 3, rng);
    TensorD x = TensorD::random_uniform({B, C, F, T}, rng, -1.0, 1.0);
    const TensorD u = TensorD::random_uniform({B, C, F, T}, rng, -1.0, 1.0);
    const auto loss = [&]() { return dot(u, c2datt_forward(x, p)); };
    const C2dAttGrads<double> g = c2datt_backward(x, p, u);
    double e = fd_check(x, g.gx, loss);
    e = std::max(e, fd_check(p.conv1_w, g.gconv1_w, loss));
    e = std::max(e, fd_check(p.conv1_b, g.gconv1_b, loss));
    e = std::max(e, fd_check(p.conv2_w, g.gconv2_w, loss));
    e = std::max(e, fd_check(p.conv2_b, g.gconv2_b, loss));
    return e;
}

double check_fdy(Rng& rng) {
    const int B = draw_dim(rng, 1, 2);
    const int cin = draw_dim(rng, 1, 3);
    const int cout = draw_dim(rng, 1, 3);
    const int F = draw_dim(rng, 3, 6);
    const int T = draw_dim(rng, 3, 5);
    const int K = draw_dim(rng, 1, 4);
    const double tau = (rng.uniform() < 0.5) ? 1.0 : 0.7;
    FdyConvParams<double> p = FdyConvParams<double>::init(conv3x3_same(cin, cout), K, tau, rng);
    p.norm_mean = TensorD::random_uniform({K}, rng, -0.5, 0.5);
    p.norm_var = TensorD::random_uniform({K}, rng, 0.5, 1.5);
    TensorD x = TensorD::random_uniform({B, cin, F, T}, rng, -1.0, 1.0);
    const TensorD u = TensorD::random_uniform({B, cout, F, T}, rng, -1.0, 1.0);
    const auto loss = [&]() { return dot(u, fdy_forward(x, p)); };
    const FdyGrads<double> g = fdy_backward(x, p, u);
    double e = fd_check(x, g.gx, loss);
    for (int k = 0; k < K; ++k) {
        e = std::max(e, fd_check(p.basis_w[static_cast<std::size_t>(k)],
                                 g.gbasis_w[static_cast<std::size_t>(k)], loss));
        e = std::max(e, fd_check(p.basis_b[static_cast<std::size_t>(k)],
                                 g.gbasis_b[static_cast<std::size_t>(k)], loss));
    }
    e = std::max(e, fd_check(p.attn_w, g.gattn_w, loss));
    e = std::max(e, fd_check(p.attn_b, g.gattn_b, loss));
    return e;
}

double check_once(const std::string& name, Rng& rng) {
    if (name == "conv") return check_conv(rng);
    if (name == "linear") return check_linear(rng);
    if (name == "activations") return check_activations(rng);
    if (name == "pool") return check_pool(rng);
    if (name == "se") return check_se_family(SeKind::se, rng);
    if (name == "tse") return check_se_family(SeKind::tse, rng);
    if (name == "fwse") return check_se_family(SeKind::fwse, rng);
    if (name == "tfwse") return check_se_family(SeKind::tfwse, rng);
    if (name == "c2datt") return check_c2datt(rng);
    if (name == "fdy") return check_fdy(rng);
    throw std::invalid_argument("unknown gradient check: " + name);
}

}  // namespace

const std::vector<std::string>& gradcheck_names() {
    static const std::vector<std::string> names = {"conv", "linear", "activations", "pool",
                                                   "se",   "tse",    "fwse",        "tfwse",
                                                   "c2datt", "fdy"};
    return names;
}

std::vector<GradCheckEntry> run_gradcheck(const std::string& which, std::uint64_t seed,
                                          int instances, double tol) {
    if (instances < 1) throw std::invalid_argument("run_gradcheck: instances must be >= 1");
    if (tol <= 0.0) throw std::invalid_argument("run_gradcheck: tolerance must be > 0");
    std::vector<std::string> todo;
    if (which == "all") {
        todo = gradcheck_names();
    } else {
        const auto& names = gradcheck_names();
        if (std::find(names.begin(), names.end(), which) == names.end())
            throw std::invalid_argument("unknown gradient check: " + which);
        todo.push_back(which);
    }
    std::vector<GradCheckEntry> out;
    for (const std::string& name : todo) {
        Rng rng(mix_seed(seed, name));
        GradCheckEntry e;
        e.name = name;
        e.instances = instances;
        for (int i = 0; i < instances; ++i) e.max_rel_err = std::max(e.max_rel_err, check_once(name, rng));
        e.pass = e.max_rel_err < tol;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace sedkit
