#pragma once

#include <span>
#include <utility>

#include "idcwh/centers.hpp"
#include "idcwh/config.hpp"
#include "idcwh/types.hpp"

namespace idcwh {

// total = l1 + gamma*l2 + beta*quant; l2 and quant are stored unweighted.
struct LossBreakdown {
    double l1 = 0.0;
    double l2 = 0.0;
    double quant = 0.0;
    double total = 0.0;
};

// Per-sample class-assignment probabilities p_ij (batch x C) kept for the
// gradient pass.
struct ClasswiseCache {
    Mat probs;
};

// Classwise cross-entropy over softmax of -||h_i - mu_j||^2 / (2 sigma^2),
// summed over the batch and over each sample's positive labels. The softmax
// uses the max-shift so arbitrarily large distances stay finite.
// batch_labels is C x batch.
double classwise_loss(const Mat& h, const LabelMatrix& batch_labels, const CenterBank& centers,
                      double sigma_sq, ClasswiseCache& cache);

struct ClasswiseGrads {
    Mat grad_h;   // batch x l
    Mat grad_mu;  // C x l
};

// Analytic gradients of classwise_loss. With n_i the number of positive
// labels of sample i:
//   dL/dh_i  = sum_k (y_ki - n_i p_ik)(h_i - mu_k) / sigma^2
//   dL/dmu_k = sum_i (n_i p_ik - y_ki)(h_i - mu_k) / sigma^2
ClasswiseGrads classwise_grads(const ClasswiseCache& cache, const Mat& h,
                               const LabelMatrix& batch_labels, const CenterBank& centers,
                               double sigma_sq);

// Similarity logit between a binary center u and a learnable center mu.
// COSINE: 0.5 * l * cos(u, mu); INNER: 0.5 * u . mu. COSINE throws DataError
// on a zero-norm mu.
double theta(const BinaryCode& u, std::span<const double> mu, ThetaMode mode);

// Negative log likelihood of the similarity matrix under the logistic model
// rho(theta): L2 = sum_ij log(1 + e^theta_ij) - s_ij * theta_ij, over seen
// rows x all C centers. Rows of s must align with u.classes.
double centers_similarity_loss(const EstimatedCenters& u, const CenterBank& centers,
                               const SimilarityMatrix& s, ThetaMode mode);

// Exact gradient of centers_similarity_loss wrt every mu_j (C x l). INNER
// reduces to 0.5 * sum_i u_i (r_ij - s_ij) with r_ij = rho(theta_ij); COSINE
// propagates the same residual through the cosine Jacobian.
Mat centers_similarity_grad_mu(const EstimatedCenters& u, const CenterBank& centers,
                               const SimilarityMatrix& s, ThetaMode mode);

// sum_i ||sign(h_i) - h_i||^2 and its gradient 2(h - sign(h)), with sign(h)
// held constant.
std::pair<double, Mat> quantization_loss(const Mat& h);

struct TotalLossResult {
    LossBreakdown breakdown;
    Mat grad_h;   // batch x l
    Mat grad_mu;  // C x l
};

// Full objective for one batch: classwise + gamma * centers-similarity +
// beta * quantization. The centers-similarity part reads the epoch's vote
// accumulator and is skipped entirely when gamma = 0 (the single-loss
// ablation must not depend on accumulator contents).
TotalLossResult total_loss_and_grads(const Mat& h, const LabelMatrix& batch_labels,
                                     const CenterBank& centers, const VoteAccumulator& acc,
                                     const TrainConfig& cfg);

}  // namespace idcwh
