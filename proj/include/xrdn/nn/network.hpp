#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "xrdn/frame.hpp"
#include "xrdn/nn/ops.hpp"
#include "xrdn/rng.hpp"

namespace xrdn::nn {

enum class Topology { vdsr, irunet };

// Residual denoiser description. The conv-layer budget covers the whole
// network; irunet splits it evenly over encoder (2 stages), bottleneck and
// decoder (2 stages), so depth must be a multiple of 5 there.
struct NetworkSpec {
    Topology topology = Topology::vdsr;
    int depth = 20;
    int filters = 64;
    int kernel = 3;
};

inline void validate_spec(const NetworkSpec& s) {
    if (s.depth < 2) throw FrameError("network: depth must be >= 2");
    if (s.filters < 1) throw FrameError("network: filters must be >= 1");
    if (s.kernel != 3) throw FrameError("network: only kernel 3 is supported");
    if (s.topology == Topology::irunet && (s.depth % 5 != 0))
        throw FrameError("network: irunet depth must be a multiple of 5");
}

template <typename T>
struct ConvLayer {
    Tensor4<T> w;       // (out_c, in_c, 3, 3)
    std::vector<T> b;   // out_c
};

template <typename T>
using ParamList = std::vector<ConvLayer<T>>;

// (in_c, out_c) per conv layer, in execution order.
inline std::vector<std::pair<int, int>> layer_plan(const NetworkSpec& s) {
    validate_spec(s);
    std::vector<std::pair<int, int>> plan;
    plan.reserve(static_cast<std::size_t>(s.depth));
    plan.emplace_back(1, s.filters);
    for (int i = 1; i < s.depth - 1; ++i) plan.emplace_back(s.filters, s.filters);
    plan.emplace_back(s.filters, 1);
    return plan;
}

// He-initialized samples: N(0, 2/fan_in).
template <typename T>
std::vector<T> he_init(std::size_t count, int fan_in, std::uint64_t seed) {
    if (fan_in <= 0) throw FrameError("he_init: fan_in must be positive");
    std::vector<T> out(count);
    Rng rng(seed);
    const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (auto& v : out) v = static_cast<T>(rng.normal(0.0, sd));
    return out;
}

template <typename T>
ParamList<T> init_params(const NetworkSpec& spec, std::uint64_t seed) {
    const auto plan = layer_plan(spec);
    ParamList<T> params;
    params.reserve(plan.size());
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto [in_c, out_c] = plan[i];
        ConvLayer<T> layer;
        layer.w = Tensor4<T>(out_c, in_c, 3, 3);
        const int fan_in = in_c * 9;
        layer.w.v = he_init<T>(layer.w.size(), fan_in, derive_seed(seed, i));
        layer.b.assign(static_cast<std::size_t>(out_c), T(0));
        params.push_back(std::move(layer));
    }
    return params;
}

template <typename T>
ParamList<T> zero_like(const ParamList<T>& params) {
    ParamList<T> out;
    out.reserve(params.size());
    for (const auto& l : params) {
        ConvLayer<T> z;
        z.w = Tensor4<T>(l.w.n, l.w.c, l.w.h, l.w.w);
        z.b.assign(l.b.size(), T(0));
        out.push_back(std::move(z));
    }
    return out;
}

template <typename T>
struct ForwardCache {
    std::vector<Tensor4<T>> conv_in;   // input of each conv layer
    std::vector<Tensor4<T>> pre_act;   // conv output before ReLU
};

namespace detail {

template <typename T>
void check_finite(const Tensor4<T>& t, int layer_index) {
    double s = 0.0;
    for (const T& v : t.v) s += static_cast<double>(v);
    if (!std::isfinite(s))
        throw FrameError("non-finite activation after conv layer " +
                         std::to_string(layer_index));
}

// Runs convs [first, last] of the chain on x; ReLU after each except when the
// layer is the network's final one.
template <typename T>
Tensor4<T> run_chain(const ParamList<T>& params, int first, int last,
                     int final_layer, Tensor4<T> x, ForwardCache<T>* cache) {
    for (int i = first; i <= last; ++i) {
        Tensor4<T> pre = conv2d_forward(x, params[static_cast<std::size_t>(i)].w,
                                        params[static_cast<std::size_t>(i)].b);
        check_finite(pre, i);
        if (cache) {
            cache->conv_in[static_cast<std::size_t>(i)] = std::move(x);
            cache->pre_act[static_cast<std::size_t>(i)] = pre;
        }
        if (i != final_layer) relu_inplace(pre);
        x = std::move(pre);
    }
    return x;
}

// Backward over the same span; g arrives as grad wrt the span's output.
template <typename T>
Tensor4<T> run_chain_backward(const ParamList<T>& params,
                              const ForwardCache<T>& cache, int first, int last,
                              int final_layer, Tensor4<T> g,
                              ParamList<T>& grads) {
    for (int i = last; i >= first; --i) {
        const auto idx = static_cast<std::size_t>(i);
        if (i != final_layer) relu_backward_inplace(g, cache.pre_act[idx]);
        Tensor4<T> gin, gw;
        std::vector<T> gb;
        conv2d_backward(g, cache.conv_in[idx], params[idx].w, gin, gw, gb);
        for (std::size_t k = 0; k < gw.v.size(); ++k) grads[idx].w.v[k] += gw.v[k];
        for (std::size_t k = 0; k < gb.size(); ++k) grads[idx].b[k] += gb[k];
        g = std::move(gin);
    }
    return g;
}

}  // namespace detail

// Residual forward pass: returns input + predicted residual. Outputs are not
// clamped here; inference-time clamping happens in denoise().
template <typename T>
Tensor4<T> network_forward(const NetworkSpec& spec, const ParamList<T>& params,
                           const Tensor4<T>& input,
                           ForwardCache<T>* cache = nullptr) {
    validate_spec(spec);
    if (input.c != 1) throw FrameError("network: input must have one channel");
    if (params.size() != static_cast<std::size_t>(spec.depth))
        throw FrameError("network: parameter count does not match depth");
    if (cache) {
        cache->conv_in.assign(params.size(), Tensor4<T>());
        cache->pre_act.assign(params.size(), Tensor4<T>());
    }
    const int last = spec.depth - 1;

    Tensor4<T> r;
    if (spec.topology == Topology::vdsr) {
        r = detail::run_chain(params, 0, last, last, input, cache);
    } else {
        if (input.h % 4 != 0 || input.w % 4 != 0)
            throw FrameError("irunet: input dims must be multiples of 4");
        const int g = spec.depth / 5;
        Tensor4<T> x1 =
            detail::run_chain(params, 0, g - 1, last, input, cache);
        Tensor4<T> x2 = detail::run_chain(params, g, 2 * g - 1, last,
                                          meanpool2_forward(x1), cache);
        Tensor4<T> xb = detail::run_chain(params, 2 * g, 3 * g - 1, last,
                                          meanpool2_forward(x2), cache);
        Tensor4<T> u1 = upsample2_forward(xb);
        for (std::size_t i = 0; i < u1.v.size(); ++i) u1.v[i] += x2.v[i];
        Tensor4<T> x3 =
            detail::run_chain(params, 3 * g, 4 * g - 1, last, std::move(u1), cache);
        Tensor4<T> u2 = upsample2_forward(x3);
        for (std::size_t i = 0; i < u2.v.size(); ++i) u2.v[i] += x1.v[i];
        r = detail::run_chain(params, 4 * g, last, last, std::move(u2), cache);
    }

    if (!r.same_shape(input))
        throw FrameError("network: residual shape mismatch");
    for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] += input.v[i];
    return r;
}

// Parameter gradients for d(loss)/d(output) in grad_out. The cache must come
// from a network_forward call with identical inputs and parameters.
template <typename T>
ParamList<T> network_backward(const NetworkSpec& spec, const ParamList<T>& params,
                              const ForwardCache<T>& cache,
                              const Tensor4<T>& grad_out) {
    validate_spec(spec);
    ParamList<T> grads = zero_like(params);
    const int last = spec.depth - 1;

    if (spec.topology == Topology::vdsr) {
        detail::run_chain_backward(params, cache, 0, last, last, grad_out, grads);
        return grads;
    }

    const int g = spec.depth / 5;
    // Mirror of the forward routing. The residual branch receives grad_out
    // unchanged (global skip adds the input outside this function).
    Tensor4<T> gu2 = detail::run_chain_backward(params, cache, 4 * g, last,
                                                last, grad_out, grads);
    Tensor4<T> gx1_skip = gu2;                       // additive skip at full res
    Tensor4<T> gx3 = upsample2_backward(gu2);
    Tensor4<T> gu1 = detail::run_chain_backward(params, cache, 3 * g, 4 * g - 1,
                                                last, std::move(gx3), grads);
    Tensor4<T> gx2_skip = gu1;                       // additive skip at half res
    Tensor4<T> gxb = upsample2_backward(gu1);
    Tensor4<T> gp2 = detail::run_chain_backward(params, cache, 2 * g, 3 * g - 1,
                                                last, std::move(gxb), grads);
    Tensor4<T> gx2 = meanpool2_backward(gp2, gp2.h * 2, gp2.w * 2);
    for (std::size_t i = 0; i < gx2.v.size(); ++i) gx2.v[i] += gx2_skip.v[i];
    Tensor4<T> gp1 = detail::run_chain_backward(params, cache, g, 2 * g - 1,
                                                last, std::move(gx2), grads);
    Tensor4<T> gx1 = meanpool2_backward(gp1, gp1.h * 2, gp1.w * 2);
    for (std::size_t i = 0; i < gx1.v.size(); ++i) gx1.v[i] += gx1_skip.v[i];
    detail::run_chain_backward(params, cache, 0, g - 1, last, std::move(gx1),
                               grads);
    return grads;
}

}  // namespace xrdn::nn
