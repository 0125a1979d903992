#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "xrdn/frame.hpp"
#include "xrdn/nn/network.hpp"

namespace xrdn::nn {

// Adam with the AMSGrad running maximum of the second moment. Bias correction
// is applied to the first moment only; v_max enters the update raw.
template <typename T>
struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long t = 0;
    std::vector<std::vector<T>> m_w, v_w, vmax_w;
    std::vector<std::vector<T>> m_b, v_b, vmax_b;

    explicit AdamState(const ParamList<T>& params) {
        for (const auto& l : params) {
            m_w.emplace_back(l.w.size(), T(0));
            v_w.emplace_back(l.w.size(), T(0));
            vmax_w.emplace_back(l.w.size(), T(0));
            m_b.emplace_back(l.b.size(), T(0));
            v_b.emplace_back(l.b.size(), T(0));
            vmax_b.emplace_back(l.b.size(), T(0));
        }
    }
};

namespace detail {

template <typename T>
void adam_update_span(T* param, const T* grad, T* m, T* v, T* vmax,
                      std::size_t count, double lr, double beta1, double beta2,
                      double eps, double m_corr) {
    for (std::size_t i = 0; i < count; ++i) {
        const double g = static_cast<double>(grad[i]);
        if (!std::isfinite(g))
            throw FrameError("adam: non-finite gradient");
        const double mi = beta1 * static_cast<double>(m[i]) + (1.0 - beta1) * g;
        const double vi =
            beta2 * static_cast<double>(v[i]) + (1.0 - beta2) * g * g;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        const double vm = std::max(static_cast<double>(vmax[i]), vi);
        vmax[i] = static_cast<T>(vm);
        const double m_hat = mi / m_corr;
        param[i] = static_cast<T>(static_cast<double>(param[i]) -
                                  lr * m_hat / (std::sqrt(vm) + eps));
    }
}

}  // namespace detail

template <typename T>
void adam_amsgrad_step(AdamState<T>& state, ParamList<T>& params,
                       const ParamList<T>& grads, double lr) {
    if (params.size() != grads.size() || params.size() != state.m_w.size())
        throw FrameError("adam: state/parameter shape mismatch");
    state.t += 1;
    const double m_corr =
        1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    for (std::size_t l = 0; l < params.size(); ++l) {
        detail::adam_update_span(params[l].w.v.data(), grads[l].w.v.data(),
                                 state.m_w[l].data(), state.v_w[l].data(),
                                 state.vmax_w[l].data(), params[l].w.size(),
                                 lr, state.beta1, state.beta2, state.eps,
                                 m_corr);
        detail::adam_update_span(params[l].b.data(), grads[l].b.data(),
                                 state.m_b[l].data(), state.v_b[l].data(),
                                 state.vmax_b[l].data(), params[l].b.size(),
                                 lr, state.beta1, state.beta2, state.eps,
                                 m_corr);
    }
}

struct TrainConfig {
    double ilr = 5e-4;
    int batch_size = 8;
    int epochs = 250;
    double flip_probability = 0.5;
    std::uint64_t seed = 0;
};

inline TrainConfig train_defaults(Topology t) {
    TrainConfig c;
    if (t == Topology::irunet) {
        c.batch_size = 16;
        c.epochs = 300;
    }
    return c;
}

// Stepwise schedules: vdsr decimates the rate after epoch 150 and then every
// further 50 epochs; irunet halves it every 100 epochs.
inline double lr_schedule(Topology topology, double ilr, int epoch) {
    if (epoch < 0) throw FrameError("lr_schedule: negative epoch");
    if (topology == Topology::vdsr) {
        if (epoch < 150) return ilr;
        const int drops = 1 + (epoch - 150) / 50;
        return ilr * std::pow(0.1, drops);
    }
    return ilr * std::pow(0.5, epoch / 100);
}

}  // namespace xrdn::nn
