#include "idcwh/trainer.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fmt.hpp"
#include "idcwh/dataset.hpp"
#include "idcwh/errors.hpp"

namespace idcwh {

void sgd_momentum_step(std::span<double> param, std::span<const double> grad,
                       std::span<double> velocity, double lr, double momentum,
                       double weight_decay) {
    if (param.size() != grad.size() || param.size() != velocity.size())
        throw DataError("sgd step shapes do not agree");
    for (std::size_t k = 0; k < param.size(); ++k) {
        velocity[k] = momentum * velocity[k] + grad[k] + weight_decay * param[k];
        param[k] -= lr * velocity[k];
    }
}

std::pair<double, double> lr_at(std::uint32_t epoch, const TrainConfig& cfg) {
    double factor = std::pow(cfg.lr_decay_factor, static_cast<double>(epoch / cfg.lr_decay_every));
    return {cfg.lr_encoder * factor, cfg.lr_centers * factor};
}

namespace {

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

bool params_finite(const TrainState& state) {
    for (const Mat& w : state.encoder.weights)
        if (!all_finite(w.data)) return false;
    for (const auto& b : state.encoder.biases)
        if (!all_finite(b)) return false;
    return all_finite(state.centers.mu.data);
}

[[noreturn]] void report_divergence(const char* what, std::uint32_t epoch, std::uint32_t iter,
                                    double value) {
    throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                          ", iteration " + std::to_string(iter) + ": " + what + " = " +
                          fmt::shortest(value));
}

}  // namespace

TrainState train(const Dataset& ds, const TrainConfig& cfg, std::ostream* log,
                 const TrainHooks& hooks) {
    validate_config(cfg);
    ds.validate();
    std::vector<std::uint32_t> train_ids = ds.split_indices(Split::Train);
    if (train_ids.empty()) throw DataError("dataset has no train split");

    Rng rng(static_cast<std::uint64_t>(cfg.seed));
    std::vector<std::uint32_t> sizes;
    sizes.push_back(ds.dim());
    sizes.insert(sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
    sizes.push_back(cfg.code_length);

    TrainState state;
    state.encoder = init_glorot(sizes, rng);
    state.encoder_velocity = EncoderGrads::zeros_like(state.encoder);
    state.centers = init_centers(ds.class_count(), cfg.code_length, rng);
    state.accumulator = VoteAccumulator(ds.class_count(), cfg.code_length);

    if (log)
        *log << "epoch\tl1\tl2\tquant\ttotal\tlr_encoder\tlr_centers\n";

    std::uint32_t iters = static_cast<std::uint32_t>(train_ids.size()) / cfg.batch_size;
    std::vector<std::uint32_t> perm = train_ids;
    for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        reset_epoch(state.accumulator);
        rng.shuffle(perm);
        auto [lr_enc, lr_cen] = lr_at(epoch, cfg);
        LossBreakdown epoch_sums;
        for (std::uint32_t it = 0; it < iters; ++it) {
            std::span<const std::uint32_t> batch(perm.data() + std::size_t{it} * cfg.batch_size,
                                                 cfg.batch_size);
            Mat x = ds.gather(batch);
            LabelMatrix y = ds.labels.slice(batch);
            ForwardCache cache;
            Mat h = forward(state.encoder, x, cache);
            vote_update(state.accumulator, h, y);
            TotalLossResult res = total_loss_and_grads(h, y, state.centers, state.accumulator, cfg);
            if (!std::isfinite(res.breakdown.total) || std::abs(res.breakdown.total) > 1e12)
                report_divergence("total loss", epoch, it, res.breakdown.total);

            EncoderGrads eg = backward(state.encoder, cache, res.grad_h);
            for (std::size_t k = 0; k < state.encoder.weights.size(); ++k) {
                sgd_momentum_step(state.encoder.weights[k].data, eg.weights[k].data,
                                  state.encoder_velocity.weights[k].data, lr_enc, cfg.momentum,
                                  cfg.weight_decay);
                sgd_momentum_step(state.encoder.biases[k], eg.biases[k],
                                  state.encoder_velocity.biases[k], lr_enc, cfg.momentum, 0.0);
            }
            sgd_momentum_step(state.centers.mu.data, res.grad_mu.data,
                              state.centers.velocity.data, lr_cen, cfg.momentum, 0.0);
            if (!params_finite(state))
                report_divergence("parameter", epoch, it,
                                  std::numeric_limits<double>::quiet_NaN());

            epoch_sums.l1 += res.breakdown.l1;
            epoch_sums.l2 += res.breakdown.l2;
            epoch_sums.quant += res.breakdown.quant;
            epoch_sums.total += res.breakdown.total;
            if (hooks.on_iteration) hooks.on_iteration(state, epoch, it, batch);
        }
        state.epoch = epoch + 1;
        state.history.push_back(epoch_sums);
        if (log)
            *log << epoch << '\t' << fmt::shortest(epoch_sums.l1) << '\t'
                 << fmt::shortest(epoch_sums.l2) << '\t' << fmt::shortest(epoch_sums.quant)
                 << '\t' << fmt::shortest(epoch_sums.total) << '\t' << fmt::shortest(lr_enc)
                 << '\t' << fmt::shortest(lr_cen) << '\n';
        if (hooks.on_epoch) hooks.on_epoch(state, epoch);
    }
    return state;
}

}  // namespace idcwh
