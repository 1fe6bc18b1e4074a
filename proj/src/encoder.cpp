#include "idcwh/encoder.hpp"

#include <cmath>
#include <string>

#include "idcwh/errors.hpp"

namespace idcwh {

EncoderGrads EncoderGrads::zeros_like(const EncoderParams& p) {
    EncoderGrads g;
    g.weights.reserve(p.weights.size());
    g.biases.reserve(p.biases.size());
    for (const Mat& w : p.weights) g.weights.emplace_back(w.rows, w.cols);
    for (const auto& b : p.biases) g.biases.emplace_back(b.size(), 0.0);
    return g;
}

EncoderParams init_glorot(const std::vector<std::uint32_t>& sizes, Rng& rng) {
    if (sizes.size() < 2) throw ConfigError("encoder needs an input and an output layer");
    for (auto s : sizes)
        if (s == 0) throw ConfigError("encoder layer widths must be positive");
    EncoderParams p;
    p.sizes = sizes;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        std::uint32_t fan_in = sizes[k];
        std::uint32_t fan_out = sizes[k + 1];
        double a = std::sqrt(6.0 / (fan_in + fan_out));
        Mat w(fan_out, fan_in);
        for (double& v : w.data) v = rng.uniform(-a, a);
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(fan_out, 0.0);
    }
    return p;
}

Mat forward(const EncoderParams& params, const Mat& x, ForwardCache& cache) {
    if (x.cols != params.input_dim())
        throw DataError("dimension mismatch: encoder expects " +
                        std::to_string(params.input_dim()) + " features, got " +
                        std::to_string(x.cols));
    cache.acts.clear();
    cache.acts.push_back(x);
    const Mat* in = &cache.acts.back();
    for (std::size_t k = 0; k < params.layer_count(); ++k) {
        const Mat& w = params.weights[k];
        const auto& b = params.biases[k];
        Mat out(in->rows, w.rows);
        for (std::size_t i = 0; i < in->rows; ++i) {
            for (std::size_t o = 0; o < w.rows; ++o) {
                double acc = b[o];
                const double* wi = w.data.data() + o * w.cols;
                const double* xi = in->data.data() + i * in->cols;
                for (std::size_t j = 0; j < w.cols; ++j) acc += wi[j] * xi[j];
                out.at(i, o) = acc;
            }
        }
        bool hidden = k + 1 < params.layer_count();
        if (hidden)
            for (double& v : out.data) v = std::tanh(v);
        cache.acts.push_back(std::move(out));
        in = &cache.acts.back();
    }
    return cache.acts.back();
}

Mat forward(const EncoderParams& params, const Mat& x) {
    ForwardCache cache;
    return forward(params, x, cache);
}

EncoderGrads backward(const EncoderParams& params, const ForwardCache& cache,
                      const Mat& grad_h) {
    if (cache.acts.size() != params.layer_count() + 1)
        throw DataError("forward cache does not match encoder depth");
    if (!grad_h.same_shape(cache.acts.back()))
        throw DataError("hash gradient shape does not match the cached forward");
    EncoderGrads g = EncoderGrads::zeros_like(params);
    Mat delta = grad_h;
    for (std::size_t k = params.layer_count(); k-- > 0;) {
        const Mat& w = params.weights[k];
        const Mat& in = cache.acts[k];  // layer k input, batch x fan_in
        Mat& gw = g.weights[k];
        auto& gb = g.biases[k];
        for (std::size_t i = 0; i < delta.rows; ++i) {
            for (std::size_t o = 0; o < w.rows; ++o) {
                double d = delta.at(i, o);
                gb[o] += d;
                double* gwo = gw.data.data() + o * gw.cols;
                const double* xi = in.data.data() + i * in.cols;
                for (std::size_t j = 0; j < w.cols; ++j) gwo[j] += d * xi[j];
            }
        }
        if (k == 0) break;
        Mat prev(delta.rows, w.cols);
        for (std::size_t i = 0; i < delta.rows; ++i) {
            for (std::size_t j = 0; j < w.cols; ++j) {
                double acc = 0.0;
                for (std::size_t o = 0; o < w.rows; ++o)
                    acc += delta.at(i, o) * w.at(o, j);
                double a = in.at(i, j);  // tanh output of layer k
                prev.at(i, j) = acc * (1.0 - a * a);
            }
        }
        delta = std::move(prev);
    }
    return g;
}

std::vector<BinaryCode> encode_binary(const EncoderParams& params, const Mat& x) {
    Mat h = forward(params, x);
    std::vector<BinaryCode> codes;
    codes.reserve(h.rows);
    for (std::size_t i = 0; i < h.rows; ++i) codes.push_back(BinaryCode::from_signs(h.row(i)));
    return codes;
}

}  // namespace idcwh
