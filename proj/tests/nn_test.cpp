#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include "xrdn/nn.hpp"
#include "xrdn/rng.hpp"

using namespace xrdn;
using namespace xrdn::nn;

namespace {

template <typename T>
Tensor4<T> random_tensor(int n, int c, int h, int w, std::uint64_t seed,
                         double lo = -1.0, double hi = 1.0) {
    Tensor4<T> t(n, c, h, w);
    Rng rng(seed);
    for (auto& v : t.v) v = static_cast<T>(rng.uniform(lo, hi));
    return t;
}

template <typename T>
ParamList<T> random_params(const NetworkSpec& spec, std::uint64_t seed,
                           double scale = 0.3) {
    ParamList<T> params;
    Rng rng(seed);
    for (const auto& [in_c, out_c] : layer_plan(spec)) {
        ConvLayer<T> l;
        l.w = Tensor4<T>(out_c, in_c, 3, 3);
        for (auto& v : l.w.v) v = static_cast<T>(rng.uniform(-scale, scale));
        l.b.resize(static_cast<std::size_t>(out_c));
        for (auto& v : l.b) v = static_cast<T>(rng.uniform(-0.05, 0.05));
        params.push_back(std::move(l));
    }
    return params;
}

// Naive zero-padded 3x3 cross-correlation used as the conv oracle.
Tensor4<double> conv_reference(const Tensor4<double>& x,
                               const Tensor4<double>& w,
                               const std::vector<double>& b) {
    Tensor4<double> out(x.n, w.n, x.h, x.w);
    for (int in = 0; in < x.n; ++in)
        for (int oc = 0; oc < w.n; ++oc)
            for (int r = 0; r < x.h; ++r)
                for (int c = 0; c < x.w; ++c) {
                    double acc = b[static_cast<std::size_t>(oc)];
                    for (int ic = 0; ic < x.c; ++ic)
                        for (int dr = -1; dr <= 1; ++dr)
                            for (int dc = -1; dc <= 1; ++dc) {
                                const int rr = r + dr, cc = c + dc;
                                if (rr < 0 || rr >= x.h || cc < 0 || cc >= x.w)
                                    continue;
                                acc += w.at(oc, ic, dr + 1, dc + 1) *
                                       x.at(in, ic, rr, cc);
                            }
                    out.at(in, oc, r, c) = acc;
                }
    return out;
}

double inner(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Scalar loss of the whole network against a fixed target, used for the
// parameter finite-difference sweeps.
double network_loss(const NetworkSpec& spec, const ParamList<double>& params,
                    const Tensor4<double>& input,
                    const std::vector<double>& target, const LossSpec& loss) {
    const Tensor4<double> out = network_forward(spec, params, input);
    return combined_loss_d(out.v, target, input.h, input.w, loss);
}

FramePair make_training_pair(int h, int w, std::uint64_t seed,
                             const std::string& id) {
    FramePair p;
    p.pair_id = id;
    p.hc = Frame(h, w);
    Rng rng(seed);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            p.hc.at(r, c) = static_cast<float>(
                40.0 + 100.0 * std::exp(-0.1 * ((r - h / 2) * (r - h / 2) +
                                                (c - w / 2) * (c - w / 2))));
    p.lc = p.hc;
    for (auto& v : p.lc.intensities)
        v = std::max(0.0f, v * 0.1f + static_cast<float>(rng.normal(0.0, 2.0)));
    return p;
}

const char* tmp_dir() {
    static std::string dir =
        (std::filesystem::temp_directory_path() / "xrdn_nn_test").string();
    std::filesystem::create_directories(dir);
    return dir.c_str();
}

}  // namespace

TEST_CASE("conv2d with a centered identity kernel shifts nothing") {
    Tensor4<double> x = random_tensor<double>(1, 1, 5, 6, 1);
    Tensor4<double> w(1, 1, 3, 3);
    w.at(0, 0, 1, 1) = 1.0;
    const std::vector<double> b{0.25};
    const Tensor4<double> out = conv2d_forward(x, w, b);
    for (std::size_t i = 0; i < x.v.size(); ++i)
        REQUIRE(out.v[i] == doctest::Approx(x.v[i] + 0.25).epsilon(1e-14));
}

TEST_CASE("conv2d box kernel counts live neighbours at the border") {
    Tensor4<double> x(1, 1, 4, 4, 1.0);
    Tensor4<double> w(1, 1, 3, 3, 1.0);
    const std::vector<double> b{0.0};
    const Tensor4<double> out = conv2d_forward(x, w, b);
    CHECK(out.at(0, 0, 1, 1) == doctest::Approx(9.0));  // interior
    CHECK(out.at(0, 0, 0, 0) == doctest::Approx(4.0));  // corner
    CHECK(out.at(0, 0, 0, 1) == doctest::Approx(6.0));  // edge
}

TEST_CASE("conv2d matches the naive reference on random tensors") {
    const Tensor4<double> x = random_tensor<double>(2, 3, 5, 4, 10);
    const Tensor4<double> w = random_tensor<double>(4, 3, 3, 3, 11);
    std::vector<double> b(4);
    Rng rng(12);
    for (auto& v : b) v = rng.uniform(-1.0, 1.0);
    const Tensor4<double> got = conv2d_forward(x, w, b);
    const Tensor4<double> want = conv_reference(x, w, b);
    REQUIRE(got.same_shape(want));
    for (std::size_t i = 0; i < got.v.size(); ++i)
        REQUIRE(got.v[i] == doctest::Approx(want.v[i]).epsilon(1e-12));
}

TEST_CASE("conv2d argument validation") {
    Tensor4<double> x(1, 2, 4, 4);
    CHECK_THROWS_AS(
        (void)conv2d_forward(x, Tensor4<double>(1, 2, 5, 5),
                             std::vector<double>{0.0}),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)conv2d_forward(x, Tensor4<double>(1, 3, 3, 3),
                             std::vector<double>{0.0}),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)conv2d_forward(x, Tensor4<double>(2, 2, 3, 3),
                             std::vector<double>{0.0}),
        std::invalid_argument);
}

TEST_CASE("conv2d backward agrees with finite differences") {
    const Tensor4<double> x = random_tensor<double>(1, 2, 4, 5, 20);
    const Tensor4<double> w = random_tensor<double>(3, 2, 3, 3, 21);
    std::vector<double> b(3);
    Rng rng(22);
    for (auto& v : b) v = rng.uniform(-0.5, 0.5);
    const Tensor4<double> gout = random_tensor<double>(1, 3, 4, 5, 23);

    Tensor4<double> gin, gw;
    std::vector<double> gb;
    conv2d_backward(gout, x, w, gin, gw, gb);

    auto loss = [&](const Tensor4<double>& xx, const Tensor4<double>& ww,
                    const std::vector<double>& bb) {
        return inner(conv2d_forward(xx, ww, bb).v, gout.v);
    };
    const double step = 1e-6;

    Tensor4<double> xp = x;
    for (std::size_t i : {std::size_t{0}, std::size_t{13}, x.v.size() - 1}) {
        xp.v[i] = x.v[i] + step;
        const double hi = loss(xp, w, b);
        xp.v[i] = x.v[i] - step;
        const double lo = loss(xp, w, b);
        xp.v[i] = x.v[i];
        REQUIRE(gin.v[i] ==
                doctest::Approx((hi - lo) / (2 * step)).epsilon(1e-6));
    }
    Tensor4<double> wp = w;
    for (std::size_t i : {std::size_t{0}, std::size_t{17}, w.v.size() - 1}) {
        wp.v[i] = w.v[i] + step;
        const double hi = loss(x, wp, b);
        wp.v[i] = w.v[i] - step;
        const double lo = loss(x, wp, b);
        wp.v[i] = w.v[i];
        REQUIRE(gw.v[i] ==
                doctest::Approx((hi - lo) / (2 * step)).epsilon(1e-6));
    }
    std::vector<double> bp = b;
    for (std::size_t i = 0; i < b.size(); ++i) {
        bp[i] = b[i] + step;
        const double hi = loss(x, w, bp);
        bp[i] = b[i] - step;
        const double lo = loss(x, w, bp);
        bp[i] = b[i];
        REQUIRE(gb[i] == doctest::Approx((hi - lo) / (2 * step)).epsilon(1e-6));
    }

    Tensor4<double> wrong = random_tensor<double>(1, 2, 4, 5, 30);
    CHECK_THROWS_AS(conv2d_backward(wrong, x, w, gin, gw, gb),
                    std::invalid_argument);
}

TEST_CASE("relu forward and backward") {
    Tensor4<double> x(1, 1, 2, 2);
    x.v = {-1.0, 0.0, 0.5, 2.0};
    Tensor4<double> pre = x;
    relu_inplace(x);
    CHECK(x.v == std::vector<double>{0.0, 0.0, 0.5, 2.0});

    Tensor4<double> g(1, 1, 2, 2, 1.0);
    relu_backward_inplace(g, pre);
    CHECK(g.v == std::vector<double>{0.0, 0.0, 1.0, 1.0});
}

TEST_CASE("pooling and upsampling are mutually adjoint maps") {
    const Tensor4<double> x = random_tensor<double>(2, 3, 6, 8, 40);

    const Tensor4<double> px = meanpool2_forward(x);
    CHECK(px.h == 3);
    CHECK(px.w == 4);
    CHECK(px.at(0, 0, 0, 0) ==
          doctest::Approx(0.25 * (x.at(0, 0, 0, 0) + x.at(0, 0, 0, 1) +
                                  x.at(0, 0, 1, 0) + x.at(0, 0, 1, 1))));
    const Tensor4<double> g1 = random_tensor<double>(2, 3, 3, 4, 41);
    const Tensor4<double> xt = meanpool2_backward(g1, 6, 8);
    CHECK(inner(px.v, g1.v) == doctest::Approx(inner(x.v, xt.v)).epsilon(1e-12));

    const Tensor4<double> ux = upsample2_forward(px);
    CHECK(ux.h == 6);
    CHECK(ux.at(0, 0, 0, 0) == px.at(0, 0, 0, 0));
    CHECK(ux.at(0, 0, 1, 1) == px.at(0, 0, 0, 0));
    const Tensor4<double> g2 = random_tensor<double>(2, 3, 6, 8, 42);
    const Tensor4<double> ut = upsample2_backward(g2);
    CHECK(inner(ux.v, g2.v) == doctest::Approx(inner(px.v, ut.v)).epsilon(1e-12));

    CHECK_THROWS_AS((void)meanpool2_forward(Tensor4<double>(1, 1, 5, 4)),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)upsample2_backward(Tensor4<double>(1, 1, 5, 4)),
                    std::invalid_argument);
}

TEST_CASE("layer plan and spec validation") {
    NetworkSpec s;
    s.topology = Topology::vdsr;
    s.depth = 4;
    s.filters = 8;
    const auto plan = layer_plan(s);
    REQUIRE(plan.size() == 4);
    CHECK(plan[0] == std::pair<int, int>{1, 8});
    CHECK(plan[1] == std::pair<int, int>{8, 8});
    CHECK(plan[2] == std::pair<int, int>{8, 8});
    CHECK(plan[3] == std::pair<int, int>{8, 1});

    NetworkSpec bad = s;
    bad.depth = 1;
    CHECK_THROWS_AS(validate_spec(bad), FrameError);
    bad = s;
    bad.filters = 0;
    CHECK_THROWS_AS(validate_spec(bad), FrameError);
    bad = s;
    bad.kernel = 5;
    CHECK_THROWS_AS(validate_spec(bad), FrameError);
    bad = s;
    bad.topology = Topology::irunet;
    bad.depth = 12;  // not a multiple of 5
    CHECK_THROWS_AS(validate_spec(bad), FrameError);
    bad.depth = 10;
    CHECK_NOTHROW(validate_spec(bad));
}

TEST_CASE("he initialization has the right spread") {
    const auto small = he_init<double>(1'000'000, 2, 7);
    double m = 0.0, v = 0.0;
    for (double x : small) m += x;
    m /= static_cast<double>(small.size());
    for (double x : small) v += (x - m) * (x - m);
    v /= static_cast<double>(small.size());
    CHECK(m == doctest::Approx(0.0).scale(1.0).epsilon(0.005));
    CHECK(v == doctest::Approx(1.0).epsilon(0.01));  // 2 / fan_in

    const auto wide = he_init<double>(1'000'000, 576, 8);
    double v2 = 0.0;
    for (double x : wide) v2 += x * x;
    v2 /= static_cast<double>(wide.size());
    CHECK(std::sqrt(v2) == doctest::Approx(std::sqrt(2.0 / 576.0)).epsilon(0.01));

    CHECK_THROWS_AS((void)he_init<double>(10, 0, 1), FrameError);
}

TEST_CASE("init_params lays out the plan with zero biases") {
    NetworkSpec s;
    s.depth = 5;
    s.filters = 6;
    const auto params = init_params<float>(s, 99);
    REQUIRE(params.size() == 5);
    CHECK(params[0].w.n == 6);
    CHECK(params[0].w.c == 1);
    CHECK(params[4].w.n == 1);
    CHECK(params[4].w.c == 6);
    for (const auto& l : params) {
        CHECK(l.w.h == 3);
        for (float b : l.b) CHECK(b == 0.0f);
    }
    // per-layer seeds differ
    CHECK(params[1].w.v != params[2].w.v);
    const auto again = init_params<float>(s, 99);
    CHECK(again[3].w.v == params[3].w.v);
}

TEST_CASE("zero-parameter networks are the identity") {
    for (auto topo : {Topology::vdsr, Topology::irunet}) {
        NetworkSpec s;
        s.topology = topo;
        s.depth = topo == Topology::vdsr ? 4 : 5;
        s.filters = 3;
        ParamList<double> params;
        for (const auto& [in_c, out_c] : layer_plan(s)) {
            ConvLayer<double> l;
            l.w = Tensor4<double>(out_c, in_c, 3, 3);
            l.b.assign(static_cast<std::size_t>(out_c), 0.0);
            params.push_back(std::move(l));
        }
        const Tensor4<double> x = random_tensor<double>(2, 1, 8, 8, 50);
        const Tensor4<double> out = network_forward(s, params, x);
        for (std::size_t i = 0; i < x.v.size(); ++i)
            REQUIRE(out.v[i] == x.v[i]);
    }
}

TEST_CASE("network input validation") {
    NetworkSpec s;
    s.depth = 3;
    s.filters = 2;
    const auto params = init_params<double>(s, 1);
    CHECK_THROWS_AS(
        (void)network_forward(s, params, Tensor4<double>(1, 2, 4, 4)),
        FrameError);
    NetworkSpec deeper = s;
    deeper.depth = 4;
    CHECK_THROWS_AS(
        (void)network_forward(deeper, params, Tensor4<double>(1, 1, 4, 4)),
        FrameError);

    NetworkSpec iru;
    iru.topology = Topology::irunet;
    iru.depth = 5;
    iru.filters = 2;
    const auto iparams = init_params<double>(iru, 2);
    CHECK_THROWS_AS(
        (void)network_forward(iru, iparams, Tensor4<double>(1, 1, 6, 6)),
        FrameError);
    CHECK_NOTHROW(
        (void)network_forward(iru, iparams, Tensor4<double>(1, 1, 8, 8)));
}

TEST_CASE("network parameter gradients match finite differences") {
    const LossSpec loss;
    for (auto topo : {Topology::vdsr, Topology::irunet}) {
        NetworkSpec s;
        s.topology = topo;
        s.depth = topo == Topology::vdsr ? 3 : 5;
        s.filters = 2;
        ParamList<double> params = random_params<double>(s, 60);
        const Tensor4<double> x = random_tensor<double>(1, 1, 8, 8, 61, 0.0, 1.0);
        std::vector<double> target = random_tensor<double>(1, 1, 8, 8, 62, 0.0, 1.0).v;

        ForwardCache<double> cache;
        const Tensor4<double> out = network_forward(s, params, x, &cache);
        std::vector<double> dldout;
        combined_loss_d(out.v, target, 8, 8, loss, &dldout);
        Tensor4<double> gout(1, 1, 8, 8);
        gout.v = dldout;
        const ParamList<double> grads = network_backward(s, params, cache, gout);

        const double step = 1e-6;
        Rng pick(63);
        for (std::size_t l = 0; l < params.size(); ++l) {
            for (int k = 0; k < 2; ++k) {
                const std::size_t i = pick.uniform_below(params[l].w.size());
                const double keep = params[l].w.v[i];
                params[l].w.v[i] = keep + step;
                const double hi = network_loss(s, params, x, target, loss);
                params[l].w.v[i] = keep - step;
                const double lo = network_loss(s, params, x, target, loss);
                params[l].w.v[i] = keep;
                const double fd = (hi - lo) / (2 * step);
                const double got = grads[l].w.v[i];
                const double scale =
                    std::max({std::abs(fd), std::abs(got), 1e-8});
                REQUIRE(std::abs(got - fd) / scale < 1e-4);
            }
            const double keep = params[l].b[0];
            params[l].b[0] = keep + step;
            const double hi = network_loss(s, params, x, target, loss);
            params[l].b[0] = keep - step;
            const double lo = network_loss(s, params, x, target, loss);
            params[l].b[0] = keep;
            const double fd = (hi - lo) / (2 * step);
            const double got = grads[l].b[0];
            const double scale = std::max({std::abs(fd), std::abs(got), 1e-8});
            REQUIRE(std::abs(got - fd) / scale < 1e-4);
        }
    }
}

TEST_CASE("network input gradients flow through the global skip") {
    // with zero parameters out == input, so dL/dinput must equal dL/dout
    NetworkSpec s;
    s.depth = 3;
    s.filters = 2;
    ParamList<double> params;
    for (const auto& [in_c, out_c] : layer_plan(s)) {
        ConvLayer<double> l;
        l.w = Tensor4<double>(out_c, in_c, 3, 3);
        l.b.assign(static_cast<std::size_t>(out_c), 0.0);
        params.push_back(std::move(l));
    }
    const Tensor4<double> x = random_tensor<double>(1, 1, 6, 6, 70, 0.1, 0.9);
    ForwardCache<double> cache;
    (void)network_forward(s, params, x, &cache);
    Tensor4<double> gout = random_tensor<double>(1, 1, 6, 6, 71);
    const ParamList<double> grads = network_backward(s, params, cache, gout);
    // all relu inputs are zero pre-activations -> weight grads may flow, but
    // the bias gradient of the last layer must equal the summed grad_out
    double gsum = 0.0;
    for (double v : gout.v) gsum += v;
    CHECK(grads[2].b[0] == doctest::Approx(gsum).epsilon(1e-12));
}

TEST_CASE("non-finite activations are reported with the layer index") {
    NetworkSpec s;
    s.depth = 3;
    s.filters = 2;
    auto params = init_params<double>(s, 5);
    params[1].w.v[0] = std::numeric_limits<double>::infinity();
    const Tensor4<double> x = random_tensor<double>(1, 1, 4, 4, 6, 0.5, 1.0);
    try {
        (void)network_forward(s, params, x);
        FAIL("expected FrameError");
    } catch (const FrameError& e) {
        CHECK(std::string(e.what()).find("non-finite activation") !=
              std::string::npos);
        CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
    }
}

TEST_CASE("adam follows the scalar recurrence") {
    NetworkSpec s;
    s.depth = 2;
    s.filters = 1;
    ParamList<double> params;
    for (const auto& [in_c, out_c] : layer_plan(s)) {
        ConvLayer<double> l;
        l.w = Tensor4<double>(out_c, in_c, 3, 3);
        l.b.assign(static_cast<std::size_t>(out_c), 0.0);
        params.push_back(std::move(l));
    }
    params[0].w.v[4] = 1.0;
    AdamState<double> state(params);
    ParamList<double> grads = zero_like(params);
    grads[0].w.v[4] = 1.0;

    const double lr = 0.1;
    const double bc1 = 1.0 - 0.9;    // written this way to share the exact
    const double bc2 = 1.0 - 0.999;  // rounding of the implementation
    adam_amsgrad_step(state, params, grads, lr);
    // first step: m_hat = 1, v_max = (1 - beta2)
    const double expect1 = 1.0 - lr / (std::sqrt(bc2) + 1e-8);
    CHECK(params[0].w.v[4] == doctest::Approx(expect1).epsilon(1e-12));
    CHECK(std::abs(1.0 - params[0].w.v[4]) ==
          doctest::Approx(lr * 31.6228).epsilon(1e-4));

    // longer run against an independent recurrence
    double p = params[0].w.v[4], m = bc1, v = bc2, vmax = bc2;
    for (int t = 2; t <= 50; ++t) {
        const double g = std::sin(0.3 * t);  // deterministic varying gradient
        grads[0].w.v[4] = g;
        adam_amsgrad_step(state, params, grads, lr);
        m = 0.9 * m + bc1 * g;
        v = 0.999 * v + bc2 * g * g;
        vmax = std::max(vmax, v);
        p -= lr * (m / (1.0 - std::pow(0.9, t))) / (std::sqrt(vmax) + 1e-8);
        REQUIRE(params[0].w.v[4] == doctest::Approx(p).epsilon(1e-12));
    }
    // untouched parameters never move
    CHECK(params[0].w.v[0] == 0.0);
    CHECK(params[1].w.v[0] == 0.0);
}

TEST_CASE("adam updates scale exactly linearly in the rate") {
    NetworkSpec s;
    s.depth = 3;
    s.filters = 2;
    ParamList<double> pa, pb;
    for (const auto& [in_c, out_c] : layer_plan(s)) {
        ConvLayer<double> l;
        l.w = Tensor4<double>(out_c, in_c, 3, 3);
        l.b.assign(static_cast<std::size_t>(out_c), 0.0);
        pa.push_back(l);
        pb.push_back(l);
    }
    AdamState<double> sa(pa), sb(pb);
    Rng rng(81);
    for (int t = 0; t < 20; ++t) {
        ParamList<double> grads = zero_like(pa);
        for (auto& l : grads) {
            for (auto& v : l.w.v) v = rng.uniform(-1.0, 1.0);
            for (auto& v : l.b) v = rng.uniform(-1.0, 1.0);
        }
        adam_amsgrad_step(sa, pa, grads, 1e-3);
        adam_amsgrad_step(sb, pb, grads, 2e-3);
    }
    for (std::size_t l = 0; l < pa.size(); ++l)
        for (std::size_t i = 0; i < pa[l].w.v.size(); ++i)
            REQUIRE(pb[l].w.v[i] == 2.0 * pa[l].w.v[i]);
}

TEST_CASE("amsgrad second-moment maximum never decreases") {
    NetworkSpec s;
    s.depth = 2;
    s.filters = 1;
    ParamList<double> params = init_params<double>(s, 3);
    AdamState<double> state(params);
    double last = 0.0;
    for (int t = 1; t <= 1000; ++t) {
        ParamList<double> grads = zero_like(params);
        grads[0].w.v[0] = 5.0 / t;  // decaying gradient
        adam_amsgrad_step(state, params, grads, 1e-3);
        REQUIRE(state.vmax_w[0][0] >= last);
        last = state.vmax_w[0][0];
        REQUIRE(state.vmax_w[0][0] >= state.v_w[0][0]);
    }
}

TEST_CASE("adam rejects non-finite gradients and zero grads do nothing") {
    NetworkSpec s;
    s.depth = 2;
    s.filters = 1;
    ParamList<double> params = init_params<double>(s, 4);
    const ParamList<double> before = params;
    AdamState<double> state(params);
    ParamList<double> grads = zero_like(params);
    adam_amsgrad_step(state, params, grads, 0.5);
    for (std::size_t l = 0; l < params.size(); ++l)
        CHECK(params[l].w.v == before[l].w.v);

    grads[0].w.v[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(adam_amsgrad_step(state, params, grads, 0.5), FrameError);
}

TEST_CASE("learning-rate schedules hit the documented spot values") {
    CHECK(lr_schedule(Topology::vdsr, 5e-4, 0) == doctest::Approx(5e-4));
    CHECK(lr_schedule(Topology::vdsr, 5e-4, 149) == doctest::Approx(5e-4));
    CHECK(lr_schedule(Topology::vdsr, 5e-4, 150) == doctest::Approx(5e-5));
    CHECK(lr_schedule(Topology::vdsr, 5e-4, 199) == doctest::Approx(5e-5));
    CHECK(lr_schedule(Topology::vdsr, 5e-4, 200) == doctest::Approx(5e-6));
    CHECK(lr_schedule(Topology::vdsr, 5e-4, 249) == doctest::Approx(5e-6));
    CHECK(lr_schedule(Topology::irunet, 5e-4, 0) == doctest::Approx(5e-4));
    CHECK(lr_schedule(Topology::irunet, 5e-4, 99) == doctest::Approx(5e-4));
    CHECK(lr_schedule(Topology::irunet, 5e-4, 100) == doctest::Approx(2.5e-4));
    CHECK(lr_schedule(Topology::irunet, 5e-4, 200) == doctest::Approx(1.25e-4));
    CHECK_THROWS_AS((void)lr_schedule(Topology::vdsr, 5e-4, -1), FrameError);
}

TEST_CASE("training config validation") {
    NetworkSpec s;
    s.depth = 3;
    s.filters = 2;
    const LossSpec loss;
    const std::vector<FramePair> one{make_training_pair(8, 8, 1, "a")};

    TrainConfig c;
    c.epochs = 1;
    c.ilr = -1.0;
    CHECK_THROWS_AS((void)train(s, c, loss, one, one), FrameError);
    c = TrainConfig{};
    c.epochs = 0;
    CHECK_THROWS_AS((void)train(s, c, loss, one, one), FrameError);
    c = TrainConfig{};
    c.epochs = 1;
    c.batch_size = 0;
    CHECK_THROWS_AS((void)train(s, c, loss, one, one), FrameError);
    c = TrainConfig{};
    c.epochs = 1;
    c.flip_probability = 1.5;
    CHECK_THROWS_AS((void)train(s, c, loss, one, one), FrameError);
    c = TrainConfig{};
    c.epochs = 1;
    CHECK_THROWS_AS((void)train(s, c, loss, {}, one), FrameError);
    CHECK_THROWS_AS((void)train(s, c, loss, one, {}), FrameError);

    std::vector<FramePair> mixed{make_training_pair(8, 8, 1, "a"),
                                 make_training_pair(12, 12, 2, "b")};
    CHECK_THROWS_AS((void)train(s, c, loss, mixed, one), FrameError);

    CHECK(train_defaults(Topology::vdsr).batch_size == 8);
    CHECK(train_defaults(Topology::vdsr).epochs == 250);
    CHECK(train_defaults(Topology::irunet).batch_size == 16);
    CHECK(train_defaults(Topology::irunet).epochs == 300);
}

TEST_CASE("zero learning rate freezes the initialized parameters") {
    NetworkSpec s;
    s.depth = 3;
    s.filters = 4;
    const LossSpec loss;
    std::vector<FramePair> pairs{make_training_pair(8, 8, 1, "a"),
                                 make_training_pair(8, 8, 2, "b")};
    TrainConfig c;
    c.ilr = 0.0;
    c.epochs = 3;
    c.batch_size = 2;
    c.seed = 5;
    const TrainResult r = train(s, c, loss, pairs, pairs);
    REQUIRE(r.history.size() == 3);
    const auto init = init_params<float>(s, derive_seed(c.seed, 0xA11));
    for (std::size_t l = 0; l < init.size(); ++l) {
        REQUIRE(r.final_params[l].w.v == init[l].w.v);
        REQUIRE(r.final_params[l].b == init[l].b);
    }
    for (const auto& row : r.history) {
        CHECK(row.lr == 0.0);
        CHECK(std::isfinite(row.train_loss));
        // frozen parameters -> identical validation loss every epoch
        CHECK(row.val_loss == r.history[0].val_loss);
    }
}

TEST_CASE("training is deterministic in the config seed") {
    NetworkSpec s;
    s.depth = 3;
    s.filters = 4;
    const LossSpec loss;
    std::vector<FramePair> tr{make_training_pair(8, 8, 1, "a"),
                              make_training_pair(8, 8, 2, "b"),
                              make_training_pair(8, 8, 3, "c")};
    std::vector<FramePair> va{make_training_pair(8, 8, 4, "d")};
    TrainConfig c;
    c.epochs = 3;
    c.batch_size = 2;
    c.seed = 11;
    const TrainResult a = train(s, c, loss, tr, va);
    const TrainResult b = train(s, c, loss, tr, va);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        REQUIRE(a.history[i].train_loss == b.history[i].train_loss);
        REQUIRE(a.history[i].val_loss == b.history[i].val_loss);
    }
    for (std::size_t l = 0; l < a.final_params.size(); ++l)
        REQUIRE(a.final_params[l].w.v == b.final_params[l].w.v);

    c.seed = 12;
    const TrainResult d = train(s, c, loss, tr, va);
    CHECK(d.history[2].train_loss != a.history[2].train_loss);
}

TEST_CASE("a small net overfits one pair") {
    NetworkSpec s;
    s.depth = 3;
    s.filters = 8;
    const LossSpec loss;
    std::vector<FramePair> one{make_training_pair(16, 16, 7, "solo")};
    TrainConfig c;
    c.epochs = 400;
    c.batch_size = 1;
    c.flip_probability = 0.0;
    c.seed = 3;
    const TrainResult r = train(s, c, loss, one, one);
    REQUIRE(!r.diverged);
    REQUIRE(r.history.size() == 400);
    CHECK(r.best_val_loss < 0.05 * r.history[0].val_loss);
    CHECK(r.best_val_loss ==
          doctest::Approx(r.history[static_cast<std::size_t>(r.best_epoch)]
                              .val_loss));
    double min_val = r.history[0].val_loss;
    for (const auto& row : r.history) min_val = std::min(min_val, row.val_loss);
    CHECK(r.best_val_loss == doctest::Approx(min_val));
}

TEST_CASE("divergence stops training and keeps the best checkpoint") {
    NetworkSpec s;
    s.depth = 3;
    s.filters = 4;
    const LossSpec loss;
    std::vector<FramePair> pairs{make_training_pair(8, 8, 1, "a"),
                                 make_training_pair(8, 8, 2, "b"),
                                 make_training_pair(8, 8, 3, "c")};
    TrainConfig c;
    c.ilr = 1e18;
    c.epochs = 5;
    c.batch_size = 1;
    c.seed = 0;
    const TrainResult r = train(s, c, loss, pairs, pairs);
    CHECK(r.diverged);
    CHECK(r.history.size() < 5);
    for (const auto& l : r.best_params)
        for (float v : l.w.v) REQUIRE(std::isfinite(v));
}

TEST_CASE("checkpoints round trip through disk") {
    NetworkSpec s;
    s.topology = Topology::irunet;
    s.depth = 5;
    s.filters = 3;
    const auto params = init_params<float>(s, 31);
    const std::string path = std::string(tmp_dir()) + "/ckpt.dnet";
    save_checkpoint(path, s, params);
    const Checkpoint back = load_checkpoint(path);
    CHECK(back.spec.topology == s.topology);
    CHECK(back.spec.depth == s.depth);
    CHECK(back.spec.filters == s.filters);
    CHECK(back.spec.kernel == 3);
    REQUIRE(back.params.size() == params.size());
    for (std::size_t l = 0; l < params.size(); ++l) {
        REQUIRE(back.params[l].w.v == params[l].w.v);
        REQUIRE(back.params[l].b == params[l].b);
    }
}

TEST_CASE("corrupt checkpoints are rejected") {
    NetworkSpec s;
    s.depth = 2;
    s.filters = 1;
    const auto params = init_params<float>(s, 1);
    const std::string dir = tmp_dir();
    const std::string path = dir + std::string("/bad.dnet");
    save_checkpoint(path, s, params);

    auto slurp = [&]() {
        std::ifstream in(path, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    auto spit = [&](const std::string& bytes, const std::string& to) {
        std::ofstream out(to, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    };
    const std::string good = slurp();

    std::string magic = good;
    magic[0] = 'X';
    spit(magic, dir + std::string("/magic.dnet"));
    CHECK_THROWS_AS((void)load_checkpoint(dir + std::string("/magic.dnet")),
                    FrameError);

    spit(good.substr(0, good.size() / 2), dir + std::string("/trunc.dnet"));
    CHECK_THROWS_AS((void)load_checkpoint(dir + std::string("/trunc.dnet")),
                    FrameError);

    CHECK_THROWS_AS((void)load_checkpoint(dir + std::string("/absent.dnet")),
                    FrameError);
}

TEST_CASE("history csv round trips") {
    const std::vector<HistoryRow> rows{{0, 5e-4, 0.5, 0.6},
                                       {1, 5e-4, 0.4, 0.45}};
    const std::string path = std::string(tmp_dir()) + "/hist.csv";
    write_history_csv(path, rows);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "epoch,lr,train_loss,val_loss");

    const auto back = read_history_csv(path);
    REQUIRE(back.size() == 2);
    CHECK(back[1].epoch == 1);
    CHECK(back[1].lr == doctest::Approx(5e-4));
    CHECK(back[1].val_loss == doctest::Approx(0.45));

    std::ofstream out(path);
    out << "epoch,rate,train_loss,val_loss\n";
    out.close();
    CHECK_THROWS_AS((void)read_history_csv(path), FrameError);
}

TEST_CASE("denoise with zero parameters reproduces the input") {
    for (auto topo : {Topology::vdsr, Topology::irunet}) {
        NetworkSpec s;
        s.topology = topo;
        s.depth = topo == Topology::vdsr ? 3 : 5;
        s.filters = 2;
        ParamList<float> params;
        for (const auto& [in_c, out_c] : layer_plan(s)) {
            ConvLayer<float> l;
            l.w = Tensor4<float>(out_c, in_c, 3, 3);
            l.b.assign(static_cast<std::size_t>(out_c), 0.0f);
            params.push_back(std::move(l));
        }
        // odd dimensions force the reflect-pad path for irunet
        Frame lc(61, 63);
        Rng rng(90);
        for (auto& v : lc.intensities)
            v = static_cast<float>(rng.uniform(1.0, 300.0));
        lc.dead[40] = 1;
        lc.intensities[40] = 0.0f;
        const Frame out = denoise(s, params, lc);
        REQUIRE(out.height == 61);
        REQUIRE(out.width == 63);
        CHECK(out.intensities[40] == 0.0f);
        for (std::size_t i = 0; i < lc.size(); ++i)
            REQUIRE(out.intensities[i] ==
                    doctest::Approx(lc.intensities[i]).epsilon(1e-4));
    }
}

TEST_CASE("denoise rejects constant frames") {
    NetworkSpec s;
    s.depth = 3;
    s.filters = 2;
    const auto params = init_params<float>(s, 1);
    const Frame flat(8, 8, 2.0f);
    try {
        (void)denoise(s, params, flat);
        FAIL("expected FrameError");
    } catch (const FrameError& e) {
        CHECK(std::string(e.what()).find("denoise input") != std::string::npos);
    }
}
