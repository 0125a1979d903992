#pragma once

#include <string>
#include <vector>

#include "xrdn/frame.hpp"
#include "xrdn/metrics.hpp"
#include "xrdn/nn/network.hpp"
#include "xrdn/nn/optimizer.hpp"

namespace xrdn::nn {

struct HistoryRow {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    ParamList<float> best_params;
    ParamList<float> final_params;
    std::vector<HistoryRow> history;
    double best_val_loss = 0.0;
    int best_epoch = -1;
    bool diverged = false;
};

// Full training loop: per-frame min-max normalization, seeded shuffling and
// flip augmentation, combined MAE+MSSIM loss against the HC frame, Adam with
// AMSGrad, and the topology's learning-rate schedule. Deterministic given the
// config seed. On divergence the loop stops with the best checkpoint so far.
TrainResult train(const NetworkSpec& spec, const TrainConfig& config,
                  const LossSpec& loss, const std::vector<FramePair>& train_pairs,
                  const std::vector<FramePair>& val_pairs);

// Normalize, forward, clamp to [0, 1], undo the normalization with the LC
// frame's own record. Odd shapes are reflect-padded for the irunet pooling
// stages and cropped back.
Frame denoise(const NetworkSpec& spec, const ParamList<float>& params,
              const Frame& lc);

struct Checkpoint {
    NetworkSpec spec;
    ParamList<float> params;
};

void save_checkpoint(const std::string& path, const NetworkSpec& spec,
                     const ParamList<float>& params);
Checkpoint load_checkpoint(const std::string& path);

void write_history_csv(const std::string& path,
                       const std::vector<HistoryRow>& rows);
std::vector<HistoryRow> read_history_csv(const std::string& path);

}  // namespace xrdn::nn
