#include "idcwh/losses.hpp"

#include <cmath>
#include <limits>

#include "idcwh/errors.hpp"

namespace idcwh {

namespace {

double log1p_exp(double t) {
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t) {
    return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

void check_alignment(const EstimatedCenters& u, const CenterBank& centers,
                     const SimilarityMatrix& s) {
    if (s.row_classes != u.classes)
        throw DataError("similarity rows do not align with the estimated centers");
    if (s.class_count != centers.class_count())
        throw DataError("similarity matrix class count does not match the center bank");
    if (u.code_length != centers.code_length())
        throw DataError("estimated center length does not match the center bank");
}

}  // namespace

double classwise_loss(const Mat& h, const LabelMatrix& batch_labels, const CenterBank& centers,
                      double sigma_sq, ClasswiseCache& cache) {
    std::uint32_t batch = static_cast<std::uint32_t>(h.rows);
    std::uint32_t c = centers.class_count();
    if (batch_labels.sample_count != batch || batch_labels.class_count != c ||
        h.cols != centers.mu.cols)
        throw DataError("classwise loss shapes do not agree");
    cache.probs = Mat(batch, c);
    double loss = 0.0;
    std::vector<double> z(c);
    for (std::uint32_t i = 0; i < batch; ++i) {
        double zmax = -std::numeric_limits<double>::infinity();
        for (std::uint32_t j = 0; j < c; ++j) {
            double d2 = 0.0;
            for (std::size_t v = 0; v < h.cols; ++v) {
                double d = h.at(i, v) - centers.mu.at(j, v);
                d2 += d * d;
            }
            z[j] = -d2 / (2.0 * sigma_sq);
            zmax = std::max(zmax, z[j]);
        }
        double denom = 0.0;
        for (std::uint32_t j = 0; j < c; ++j) denom += std::exp(z[j] - zmax);
        double log_denom = std::log(denom);
        for (std::uint32_t j = 0; j < c; ++j)
            cache.probs.at(i, j) = std::exp(z[j] - zmax) / denom;
        for (std::uint32_t j : batch_labels.labels_of(i))
            loss -= z[j] - zmax - log_denom;  // -log p_ij
    }
    return loss;
}

ClasswiseGrads classwise_grads(const ClasswiseCache& cache, const Mat& h,
                               const LabelMatrix& batch_labels, const CenterBank& centers,
                               double sigma_sq) {
    std::uint32_t batch = static_cast<std::uint32_t>(h.rows);
    std::uint32_t c = centers.class_count();
    if (cache.probs.rows != batch || cache.probs.cols != c)
        throw DataError("classwise cache does not match the batch");
    ClasswiseGrads g;
    g.grad_h = Mat(batch, h.cols);
    g.grad_mu = Mat(c, h.cols);
    for (std::uint32_t i = 0; i < batch; ++i) {
        auto labels = batch_labels.labels_of(i);
        double n = static_cast<double>(labels.size());
        std::size_t li = 0;
        for (std::uint32_t k = 0; k < c; ++k) {
            double y = 0.0;
            if (li < labels.size() && labels[li] == k) {
                y = 1.0;
                ++li;
            }
            // dL/dz_ik = n_i p_ik - y_ki, then z_ik = -||h_i-mu_k||^2/(2s^2).
            double w = (n * cache.probs.at(i, k) - y) / sigma_sq;
            if (w == 0.0) continue;
            for (std::size_t v = 0; v < h.cols; ++v) {
                double diff = h.at(i, v) - centers.mu.at(k, v);
                g.grad_h.at(i, v) -= w * diff;
                g.grad_mu.at(k, v) += w * diff;
            }
        }
    }
    return g;
}

double theta(const BinaryCode& u, std::span<const double> mu, ThetaMode mode) {
    double dot = 0.0;
    for (std::uint32_t v = 0; v < u.length; ++v) dot += (u.bit(v) ? 1.0 : -1.0) * mu[v];
    if (mode == ThetaMode::Inner) return 0.5 * dot;
    double norm_sq = 0.0;
    for (double m : mu) norm_sq += m * m;
    if (norm_sq == 0.0) throw DataError("degenerate center: zero norm under COSINE theta");
    // ||u|| = sqrt(l) exactly, so 0.5*l*cos = 0.5*sqrt(l)*dot/||mu||.
    return 0.5 * std::sqrt(static_cast<double>(u.length)) * dot / std::sqrt(norm_sq);
}

double centers_similarity_loss(const EstimatedCenters& u, const CenterBank& centers,
                               const SimilarityMatrix& s, ThetaMode mode) {
    check_alignment(u, centers, s);
    double loss = 0.0;
    for (std::size_t r = 0; r < u.classes.size(); ++r) {
        for (std::uint32_t j = 0; j < centers.class_count(); ++j) {
            double t = theta(u.codes[r], centers.mu.row(j), mode);
            loss += log1p_exp(t) - (s.at(r, j) ? t : 0.0);
        }
    }
    return loss;
}

Mat centers_similarity_grad_mu(const EstimatedCenters& u, const CenterBank& centers,
                               const SimilarityMatrix& s, ThetaMode mode) {
    check_alignment(u, centers, s);
    std::uint32_t l = centers.code_length();
    Mat grad(centers.class_count(), l);
    double sqrt_l = std::sqrt(static_cast<double>(l));
    for (std::size_t r = 0; r < u.classes.size(); ++r) {
        std::vector<int> signs = u.codes[r].to_signs();
        for (std::uint32_t j = 0; j < centers.class_count(); ++j) {
            auto mu = centers.mu.row(j);
            double residual = sigmoid(theta(u.codes[r], mu, mode)) - (s.at(r, j) ? 1.0 : 0.0);
            if (mode == ThetaMode::Inner) {
                for (std::uint32_t v = 0; v < l; ++v)
                    grad.at(j, v) += 0.5 * residual * signs[v];
            } else {
                double dot = 0.0, norm_sq = 0.0;
                for (std::uint32_t v = 0; v < l; ++v) {
                    dot += signs[v] * mu[v];
                    norm_sq += mu[v] * mu[v];
                }
                double norm = std::sqrt(norm_sq);
                // d theta / d mu = 0.5*sqrt(l) * (u/||mu|| - dot*mu/||mu||^3)
                for (std::uint32_t v = 0; v < l; ++v) {
                    double jac = 0.5 * sqrt_l * (signs[v] / norm - dot * mu[v] / (norm_sq * norm));
                    grad.at(j, v) += residual * jac;
                }
            }
        }
    }
    return grad;
}

std::pair<double, Mat> quantization_loss(const Mat& h) {
    double loss = 0.0;
    Mat grad(h.rows, h.cols);
    for (std::size_t k = 0; k < h.data.size(); ++k) {
        double b = sign_bit(h.data[k]);
        double diff = b - h.data[k];
        loss += diff * diff;
        grad.data[k] = -2.0 * diff;
    }
    return {loss, std::move(grad)};
}

TotalLossResult total_loss_and_grads(const Mat& h, const LabelMatrix& batch_labels,
                                     const CenterBank& centers, const VoteAccumulator& acc,
                                     const TrainConfig& cfg) {
    TotalLossResult out;
    ClasswiseCache cache;
    out.breakdown.l1 = classwise_loss(h, batch_labels, centers, cfg.sigma_sq, cache);
    ClasswiseGrads cg = classwise_grads(cache, h, batch_labels, centers, cfg.sigma_sq);
    out.grad_h = std::move(cg.grad_h);
    out.grad_mu = std::move(cg.grad_mu);

    if (cfg.gamma != 0.0) {
        EstimatedCenters est = estimate(acc);
        SimilarityMatrix s = build_similarity(est.classes, centers.class_count());
        out.breakdown.l2 = centers_similarity_loss(est, centers, s, cfg.theta_mode);
        Mat g2 = centers_similarity_grad_mu(est, centers, s, cfg.theta_mode);
        for (std::size_t k = 0; k < out.grad_mu.data.size(); ++k)
            out.grad_mu.data[k] += cfg.gamma * g2.data[k];
    }

    auto [quant, gq] = quantization_loss(h);
    out.breakdown.quant = quant;
    if (cfg.beta != 0.0)
        for (std::size_t k = 0; k < out.grad_h.data.size(); ++k)
            out.grad_h.data[k] += cfg.beta * gq.data[k];

    out.breakdown.total =
        out.breakdown.l1 + cfg.gamma * out.breakdown.l2 + cfg.beta * out.breakdown.quant;
    return out;
}

}  // namespace idcwh
