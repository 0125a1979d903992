#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "xrdn/csv.hpp"
#include "xrdn/nn.hpp"
#include "xrdn/normalize.hpp"
#include "xrdn/rng.hpp"

namespace xrdn::nn {

namespace {

struct Sample {
    std::vector<float> lc;
    std::vector<float> hc;
};

// Pairs are normalized once up front; training runs entirely in [0, 1].
std::vector<Sample> prepare(const std::vector<FramePair>& pairs, int& height,
                            int& width) {
    std::vector<Sample> out;
    out.reserve(pairs.size());
    for (const FramePair& p : pairs) {
        validate_pair(p);
        if (out.empty() && height == 0) {
            height = p.lc.height;
            width = p.lc.width;
        }
        if (p.lc.height != height || p.lc.width != width)
            throw FrameError("train: frame shapes differ across dataset");
        FramePair copy = p;
        normalize_pair(copy);
        out.push_back({std::move(copy.lc.intensities),
                       std::move(copy.hc.intensities)});
    }
    return out;
}

void fill_plane(float* dst, const std::vector<float>& src, int height,
                int width, bool flip) {
    if (!flip) {
        std::copy(src.begin(), src.end(), dst);
        return;
    }
    for (int r = 0; r < height; ++r) {
        const float* row = src.data() + static_cast<std::size_t>(height - 1 - r) *
                                            static_cast<std::size_t>(width);
        std::copy(row, row + width, dst + static_cast<std::size_t>(r) * width);
    }
}

// Mean combined loss over the set, forward passes only.
double evaluate(const NetworkSpec& spec, const ParamList<float>& params,
                const LossSpec& loss, const std::vector<Sample>& samples,
                int height, int width, int batch_size) {
    const std::size_t count = samples.size();
    const std::size_t pixels =
        static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    double total = 0.0;
    std::vector<double> xo(pixels), yo(pixels);
    for (std::size_t start = 0; start < count; start += batch_size) {
        const int b = static_cast<int>(
            std::min<std::size_t>(batch_size, count - start));
        Tensor4<float> x(b, 1, height, width);
        for (int i = 0; i < b; ++i)
            fill_plane(x.plane(i, 0), samples[start + i].lc, height, width,
                       false);
        const Tensor4<float> out = network_forward(spec, params, x);
        for (int i = 0; i < b; ++i) {
            const float* op = out.plane(i, 0);
            const std::vector<float>& hc = samples[start + i].hc;
            for (std::size_t k = 0; k < pixels; ++k) {
                xo[k] = static_cast<double>(op[k]);
                yo[k] = static_cast<double>(hc[k]);
            }
            total += combined_loss_d(xo, yo, height, width, loss);
        }
    }
    return total / static_cast<double>(count);
}

int fold_reflect(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

}  // namespace

TrainResult train(const NetworkSpec& spec, const TrainConfig& config,
                  const LossSpec& loss, const std::vector<FramePair>& train_pairs,
                  const std::vector<FramePair>& val_pairs) {
    validate_spec(spec);
    if (config.ilr < 0.0) throw FrameError("train: initial lr must be non-negative");
    if (config.batch_size < 1) throw FrameError("train: batch size must be >= 1");
    if (config.epochs < 1) throw FrameError("train: epochs must be >= 1");
    if (config.flip_probability < 0.0 || config.flip_probability > 1.0)
        throw FrameError("train: flip probability must be in [0, 1]");
    if (train_pairs.empty()) throw FrameError("train: empty training set");
    if (val_pairs.empty()) throw FrameError("train: empty validation set");

    int height = 0, width = 0;
    const std::vector<Sample> train_set = prepare(train_pairs, height, width);
    const std::vector<Sample> val_set = prepare(val_pairs, height, width);
    if (spec.topology == Topology::irunet &&
        (height % 4 != 0 || width % 4 != 0))
        throw FrameError("train: irunet needs frame dims divisible by 4");

    const std::size_t pixels =
        static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    const std::size_t n = train_set.size();

    TrainResult result;
    ParamList<float> params =
        init_params<float>(spec, derive_seed(config.seed, 0xA11));
    AdamState<float> state(params);
    result.best_params = params;
    result.best_val_loss = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> order(n);
    std::vector<char> flips(n);
    std::vector<double> xo(pixels), yo(pixels), grad(pixels);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = lr_schedule(spec.topology, config.ilr, epoch);
        Rng rng(derive_seed(config.seed, 2 * static_cast<std::uint64_t>(epoch) + 1));
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_below(i)]);
        for (std::size_t i = 0; i < n; ++i)
            flips[i] = rng.uniform01() < config.flip_probability ? 1 : 0;

        double train_total = 0.0;
        bool numeric_failure = false;
        try {
            for (std::size_t start = 0; start < n;
                 start += config.batch_size) {
                const int b = static_cast<int>(
                    std::min<std::size_t>(config.batch_size, n - start));
                Tensor4<float> x(b, 1, height, width);
                for (int i = 0; i < b; ++i)
                    fill_plane(x.plane(i, 0), train_set[order[start + i]].lc,
                               height, width, flips[start + i] != 0);

                ForwardCache<float> cache;
                const Tensor4<float> out =
                    network_forward(spec, params, x, &cache);

                Tensor4<float> grad_out(b, 1, height, width);
                const double inv_b = 1.0 / static_cast<double>(b);
                for (int i = 0; i < b; ++i) {
                    const float* op = out.plane(i, 0);
                    for (std::size_t k = 0; k < pixels; ++k)
                        xo[k] = static_cast<double>(op[k]);
                    const Sample& s = train_set[order[start + i]];
                    if (flips[start + i] != 0) {
                        for (int r = 0; r < height; ++r)
                            for (int c = 0; c < width; ++c)
                                yo[static_cast<std::size_t>(r) * width + c] =
                                    s.hc[static_cast<std::size_t>(height - 1 - r) *
                                             width +
                                         c];
                    } else {
                        for (std::size_t k = 0; k < pixels; ++k)
                            yo[k] = static_cast<double>(s.hc[k]);
                    }
                    train_total +=
                        combined_loss_d(xo, yo, height, width, loss, &grad);
                    float* gp = grad_out.plane(i, 0);
                    for (std::size_t k = 0; k < pixels; ++k)
                        gp[k] = static_cast<float>(grad[k] * inv_b);
                }

                const ParamList<float> grads =
                    network_backward(spec, params, cache, grad_out);
                adam_amsgrad_step(state, params, grads, lr);
            }
        } catch (const FrameError&) {
            numeric_failure = true;
        }

        if (numeric_failure) {
            result.diverged = true;
            break;
        }

        const double train_loss = train_total / static_cast<double>(n);
        const double val_loss = evaluate(spec, params, loss, val_set, height,
                                         width, config.batch_size);
        result.history.push_back({epoch, lr, train_loss, val_loss});

        if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
            result.diverged = true;
            break;
        }
        if (val_loss < result.best_val_loss) {
            result.best_val_loss = val_loss;
            result.best_epoch = epoch;
            result.best_params = params;
        }
    }

    result.final_params = std::move(params);
    return result;
}

Frame denoise(const NetworkSpec& spec, const ParamList<float>& params,
              const Frame& lc) {
    validate_spec(spec);
    validate_frame(lc, "denoise input", false);

    Frame work = lc;
    const NormRecord rec = normalize_minmax(work, "denoise input");

    int ph = lc.height, pw = lc.width;
    if (spec.topology == Topology::irunet) {
        ph = (lc.height + 3) / 4 * 4;
        pw = (lc.width + 3) / 4 * 4;
    }
    Tensor4<float> x(1, 1, ph, pw);
    for (int r = 0; r < ph; ++r) {
        const int sr = fold_reflect(r, lc.height);
        for (int c = 0; c < pw; ++c)
            x.at(0, 0, r, c) = work.at(sr, fold_reflect(c, lc.width));
    }

    const Tensor4<float> out = network_forward(spec, params, x);

    Frame result = lc;
    for (int r = 0; r < lc.height; ++r)
        for (int c = 0; c < lc.width; ++c)
            result.at(r, c) = std::clamp(out.at(0, 0, r, c), 0.0f, 1.0f);
    denormalize_minmax(result, rec);
    zero_dead(result);
    return result;
}

void write_history_csv(const std::string& path,
                       const std::vector<HistoryRow>& rows) {
    CsvTable t;
    t.header = {"epoch", "lr", "train_loss", "val_loss"};
    for (const HistoryRow& r : rows)
        t.rows.push_back({std::to_string(r.epoch), format_double(r.lr),
                          format_double(r.train_loss),
                          format_double(r.val_loss)});
    write_csv(path, t);
}

std::vector<HistoryRow> read_history_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    if (t.header != std::vector<std::string>{"epoch", "lr", "train_loss",
                                             "val_loss"})
        throw FrameError("history csv: unexpected header in " + path);
    std::vector<HistoryRow> rows;
    rows.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        if (row.size() != 4)
            throw FrameError("history csv: bad row in " + path);
        rows.push_back({std::stoi(row[0]), std::stod(row[1]),
                        std::stod(row[2]), std::stod(row[3])});
    }
    return rows;
}

}  // namespace xrdn::nn
