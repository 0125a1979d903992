#pragma once

#include <cmath>
#include <stdexcept>

#include "xrdn/nn/tensor.hpp"
#include "xrdn/parallel.hpp"

namespace xrdn::nn {

// 3x3 cross-correlation with zero padding 1, so spatial dims are preserved.
// Weights are (out_c, in_c, 3, 3); one bias per output channel.
// The shift-accumulate form keeps the inner loop contiguous.
template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& input, const Tensor4<T>& weights,
                          const std::vector<T>& bias) {
    if (weights.h != 3 || weights.w != 3)
        throw std::invalid_argument("conv2d: kernel must be 3x3");
    if (weights.c != input.c)
        throw std::invalid_argument("conv2d: channel mismatch");
    if (bias.size() != static_cast<std::size_t>(weights.n))
        throw std::invalid_argument("conv2d: bias size mismatch");

    const int H = input.h, W = input.w;
    Tensor4<T> out(input.n, weights.n, H, W);

    parallel_for(static_cast<std::size_t>(input.n) * weights.n, [&](std::size_t job) {
        const int in = static_cast<int>(job) / weights.n;
        const int oc = static_cast<int>(job) % weights.n;
        T* op = out.plane(in, oc);
        const T b = bias[static_cast<std::size_t>(oc)];
        for (int i = 0; i < H * W; ++i) op[i] = b;
        for (int ic = 0; ic < input.c; ++ic) {
            const T* ip = input.plane(in, ic);
            for (int dr = -1; dr <= 1; ++dr) {
                const int r0 = std::max(0, -dr), r1 = std::min(H, H - dr);
                for (int dc = -1; dc <= 1; ++dc) {
                    const T wv = weights.at(oc, ic, dr + 1, dc + 1);
                    const int c0 = std::max(0, -dc), c1 = std::min(W, W - dc);
                    for (int r = r0; r < r1; ++r) {
                        T* orow = op + static_cast<std::size_t>(r) * W;
                        const T* irow =
                            ip + static_cast<std::size_t>(r + dr) * W + dc;
                        for (int c = c0; c < c1; ++c) orow[c] += wv * irow[c];
                    }
                }
            }
        }
    });
    return out;
}

// Gradients of the conv above. grad_input has the input's shape, grad_weights
// and grad_bias the parameter shapes.
template <typename T>
void conv2d_backward(const Tensor4<T>& grad_out, const Tensor4<T>& input,
                     const Tensor4<T>& weights, Tensor4<T>& grad_input,
                     Tensor4<T>& grad_weights, std::vector<T>& grad_bias) {
    const int H = input.h, W = input.w;
    if (grad_out.n != input.n || grad_out.c != weights.n || grad_out.h != H ||
        grad_out.w != W)
        throw std::invalid_argument("conv2d_backward: shape mismatch");

    grad_input = Tensor4<T>(input.n, input.c, H, W);
    grad_weights = Tensor4<T>(weights.n, weights.c, 3, 3);
    grad_bias.assign(static_cast<std::size_t>(weights.n), T(0));

    // d/d(input): out[r][c] += w[dr][dc] * in[r+dr][c+dc] transposed.
    parallel_for(static_cast<std::size_t>(input.n) * input.c, [&](std::size_t job) {
        const int in = static_cast<int>(job) / input.c;
        const int ic = static_cast<int>(job) % input.c;
        T* gp = grad_input.plane(in, ic);
        for (int oc = 0; oc < weights.n; ++oc) {
            const T* gop = grad_out.plane(in, oc);
            for (int dr = -1; dr <= 1; ++dr) {
                const int r0 = std::max(0, -dr), r1 = std::min(H, H - dr);
                for (int dc = -1; dc <= 1; ++dc) {
                    const T wv = weights.at(oc, ic, dr + 1, dc + 1);
                    const int c0 = std::max(0, -dc), c1 = std::min(W, W - dc);
                    for (int r = r0; r < r1; ++r) {
                        T* grow = gp + static_cast<std::size_t>(r + dr) * W + dc;
                        const T* gorow = gop + static_cast<std::size_t>(r) * W;
                        for (int c = c0; c < c1; ++c) grow[c] += wv * gorow[c];
                    }
                }
            }
        }
    });

    // d/d(weights): inner product of grad_out with the shifted input plane.
    parallel_for(static_cast<std::size_t>(weights.n) * weights.c, [&](std::size_t job) {
        const int oc = static_cast<int>(job) / weights.c;
        const int ic = static_cast<int>(job) % weights.c;
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                const int r0 = std::max(0, -dr), r1 = std::min(H, H - dr);
                const int c0 = std::max(0, -dc), c1 = std::min(W, W - dc);
                T acc = T(0);
                for (int in = 0; in < input.n; ++in) {
                    const T* gop = grad_out.plane(in, oc);
                    const T* ip = input.plane(in, ic);
                    for (int r = r0; r < r1; ++r) {
                        const T* gorow = gop + static_cast<std::size_t>(r) * W;
                        const T* irow =
                            ip + static_cast<std::size_t>(r + dr) * W + dc;
                        for (int c = c0; c < c1; ++c) acc += gorow[c] * irow[c];
                    }
                }
                grad_weights.at(oc, ic, dr + 1, dc + 1) = acc;
            }
        }
    });

    for (int oc = 0; oc < weights.n; ++oc) {
        T acc = T(0);
        for (int in = 0; in < input.n; ++in) {
            const T* gop = grad_out.plane(in, oc);
            for (int i = 0; i < H * W; ++i) acc += gop[i];
        }
        grad_bias[static_cast<std::size_t>(oc)] = acc;
    }
}

template <typename T>
void relu_inplace(Tensor4<T>& x) {
    for (auto& v : x.v)
        if (v < T(0)) v = T(0);
}

// grad through ReLU given the pre-activation values.
template <typename T>
void relu_backward_inplace(Tensor4<T>& grad, const Tensor4<T>& pre_activation) {
    for (std::size_t i = 0; i < grad.v.size(); ++i)
        if (pre_activation.v[i] <= T(0)) grad.v[i] = T(0);
}

// 2x2 mean pooling; dimensions must be even.
template <typename T>
Tensor4<T> meanpool2_forward(const Tensor4<T>& input) {
    if (input.h % 2 != 0 || input.w % 2 != 0)
        throw std::invalid_argument("meanpool2: dims must be even");
    Tensor4<T> out(input.n, input.c, input.h / 2, input.w / 2);
    for (int in = 0; in < input.n; ++in) {
        for (int ic = 0; ic < input.c; ++ic) {
            const T* ip = input.plane(in, ic);
            T* op = out.plane(in, ic);
            for (int r = 0; r < out.h; ++r) {
                for (int c = 0; c < out.w; ++c) {
                    const std::size_t a =
                        static_cast<std::size_t>(2 * r) * input.w + 2 * c;
                    op[static_cast<std::size_t>(r) * out.w + c] =
                        (ip[a] + ip[a + 1] + ip[a + input.w] +
                         ip[a + input.w + 1]) /
                        T(4);
                }
            }
        }
    }
    return out;
}

template <typename T>
Tensor4<T> meanpool2_backward(const Tensor4<T>& grad_out, int in_h, int in_w) {
    Tensor4<T> grad(grad_out.n, grad_out.c, in_h, in_w);
    for (int in = 0; in < grad_out.n; ++in) {
        for (int ic = 0; ic < grad_out.c; ++ic) {
            const T* gop = grad_out.plane(in, ic);
            T* gp = grad.plane(in, ic);
            for (int r = 0; r < grad_out.h; ++r) {
                for (int c = 0; c < grad_out.w; ++c) {
                    const T g =
                        gop[static_cast<std::size_t>(r) * grad_out.w + c] / T(4);
                    const std::size_t a =
                        static_cast<std::size_t>(2 * r) * in_w + 2 * c;
                    gp[a] += g;
                    gp[a + 1] += g;
                    gp[a + in_w] += g;
                    gp[a + in_w + 1] += g;
                }
            }
        }
    }
    return grad;
}

// Nearest-neighbour 2x upsampling.
template <typename T>
Tensor4<T> upsample2_forward(const Tensor4<T>& input) {
    Tensor4<T> out(input.n, input.c, input.h * 2, input.w * 2);
    for (int in = 0; in < input.n; ++in) {
        for (int ic = 0; ic < input.c; ++ic) {
            const T* ip = input.plane(in, ic);
            T* op = out.plane(in, ic);
            for (int r = 0; r < out.h; ++r) {
                const T* irow =
                    ip + static_cast<std::size_t>(r / 2) * input.w;
                T* orow = op + static_cast<std::size_t>(r) * out.w;
                for (int c = 0; c < out.w; ++c) orow[c] = irow[c / 2];
            }
        }
    }
    return out;
}

template <typename T>
Tensor4<T> upsample2_backward(const Tensor4<T>& grad_out) {
    if (grad_out.h % 2 != 0 || grad_out.w % 2 != 0)
        throw std::invalid_argument("upsample2_backward: dims must be even");
    Tensor4<T> grad(grad_out.n, grad_out.c, grad_out.h / 2, grad_out.w / 2);
    for (int in = 0; in < grad_out.n; ++in) {
        for (int ic = 0; ic < grad_out.c; ++ic) {
            const T* gop = grad_out.plane(in, ic);
            T* gp = grad.plane(in, ic);
            for (int r = 0; r < grad_out.h; ++r) {
                const T* gorow = gop + static_cast<std::size_t>(r) * grad_out.w;
                T* grow = gp + static_cast<std::size_t>(r / 2) * grad.w;
                for (int c = 0; c < grad_out.w; ++c) grow[c / 2] += gorow[c];
            }
        }
    }
    return grad;
}

}  // namespace xrdn::nn
