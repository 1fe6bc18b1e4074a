#pragma once

#include <cstdint>
#include <vector>

#include "idcwh/rng.hpp"
#include "idcwh/types.hpp"

namespace idcwh {

// Fully connected encoder: tanh on hidden layers, identity on the final hash
// layer. sizes = [input_dim, hidden..., code_length]. weights[k] maps layer k
// to layer k+1 and has shape sizes[k+1] x sizes[k].
struct EncoderParams {
    std::vector<std::uint32_t> sizes;
    std::vector<Mat> weights;
    std::vector<std::vector<double>> biases;

    std::size_t layer_count() const { return weights.size(); }
    std::uint32_t input_dim() const { return sizes.front(); }
    std::uint32_t code_length() const { return sizes.back(); }

    bool operator==(const EncoderParams&) const = default;
};

// Per-layer activations kept for the backward pass. acts[0] is the input
// batch; acts[k] for k >= 1 is layer k's output after its activation.
struct ForwardCache {
    std::vector<Mat> acts;
};

// Same shapes as EncoderParams' weights and biases.
struct EncoderGrads {
    std::vector<Mat> weights;
    std::vector<std::vector<double>> biases;

    static EncoderGrads zeros_like(const EncoderParams& p);
};

// Weights ~ Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)); biases zero.
// sizes needs at least an input and an output layer, all widths positive.
EncoderParams init_glorot(const std::vector<std::uint32_t>& sizes, Rng& rng);

// Batch forward pass; x is batch_size x input_dim, the result is
// batch_size x code_length. Throws DataError on a dimension mismatch.
Mat forward(const EncoderParams& params, const Mat& x, ForwardCache& cache);
Mat forward(const EncoderParams& params, const Mat& x);

// Parameter gradients for a scalar loss whose gradient wrt the hash outputs
// is grad_h (same shape as the forward result). Gradients are summed over the
// batch. Throws DataError if grad_h does not match the cached forward.
EncoderGrads backward(const EncoderParams& params, const ForwardCache& cache, const Mat& grad_h);

// sign(forward(x)) bit-packed per sample; sign(0) = +1.
std::vector<BinaryCode> encode_binary(const EncoderParams& params, const Mat& x);

}  // namespace idcwh
