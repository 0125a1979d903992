#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace xrdn::nn {

// Dense NCHW tensor. Templated so the gradient-check suite can run the whole
// stack in double while training stays in float.
template <typename T>
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> v;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_, T fill = T(0))
        : n(n_), c(c_), h(h_), w(w_),
          v(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {
        if (n_ <= 0 || c_ <= 0 || h_ <= 0 || w_ <= 0)
            throw std::invalid_argument("tensor dims must be positive");
    }

    std::size_t size() const { return v.size(); }

    std::size_t index(int in, int ic, int ir, int iw) const {
        return ((static_cast<std::size_t>(in) * c + ic) * h + ir) * w + iw;
    }

    T& at(int in, int ic, int ir, int iw) { return v[index(in, ic, ir, iw)]; }
    T at(int in, int ic, int ir, int iw) const { return v[index(in, ic, ir, iw)]; }

    T* plane(int in, int ic) { return v.data() + index(in, ic, 0, 0); }
    const T* plane(int in, int ic) const { return v.data() + index(in, ic, 0, 0); }

    bool same_shape(const Tensor4& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }
};

}  // namespace xrdn::nn
