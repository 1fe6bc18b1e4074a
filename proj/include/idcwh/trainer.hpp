#pragma once

#include <functional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "idcwh/centers.hpp"
#include "idcwh/config.hpp"
#include "idcwh/encoder.hpp"
#include "idcwh/losses.hpp"
#include "idcwh/types.hpp"

namespace idcwh {

struct TrainState {
    EncoderParams encoder;
    EncoderGrads encoder_velocity;       // momentum buffers, same shapes as encoder
    CenterBank centers;                  // carries its own momentum buffer
    VoteAccumulator accumulator;
    std::uint32_t epoch = 0;             // completed epochs
    std::vector<LossBreakdown> history;  // one entry per epoch, parts summed over iterations
};

// Test and instrumentation hooks. on_iteration runs after an iteration's
// parameter updates with the batch's sample ids; on_epoch runs after each
// completed epoch. The state reference is mutable on purpose so tests can
// perturb it between iterations.
struct TrainHooks {
    std::function<void(TrainState&, std::uint32_t epoch, std::uint32_t iteration,
                       std::span<const std::uint32_t> batch_ids)>
        on_iteration;
    std::function<void(TrainState&, std::uint32_t epoch)> on_epoch;
};

// v <- momentum * v + grad + weight_decay * param; param <- param - lr * v.
void sgd_momentum_step(std::span<double> param, std::span<const double> grad,
                       std::span<double> velocity, double lr, double momentum,
                       double weight_decay);

// Learning rates for an epoch index: base * factor^(epoch / decay_every),
// integer division. Returns (encoder lr, centers lr).
std::pair<double, double> lr_at(std::uint32_t epoch, const TrainConfig& cfg);

// Full training loop. Per epoch: reset the vote accumulator, shuffle the
// train split, run floor(N/batch_size) iterations (the leftover tail is
// dropped); per iteration: forward, vote, loss and gradients, encoder
// backprop, SGD-momentum updates (weight decay on encoder weights only).
// Deterministic for a fixed (dataset, config) pair. If `log` is set, one
// tab-separated line per epoch is written after a fixed header.
// Throws DataError when the train split is empty and DivergenceError when a
// loss or parameter goes non-finite (or total exceeds 1e12), naming the
// epoch and iteration.
TrainState train(const Dataset& ds, const TrainConfig& cfg, std::ostream* log = nullptr,
                 const TrainHooks& hooks = {});

}  // namespace idcwh
