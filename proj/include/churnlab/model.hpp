#pragma once

#include "churnlab/reg_loss.hpp"
#include "churnlab/types.hpp"
#include "churnlab/xex_softmax.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace churnlab {

enum class Arch { linear, mlp1 };

/// Parameters of the tiny classifiers. linear uses w1 (K x d) and b1 (K);
/// mlp1 adds a tanh hidden layer: w1 (h x d), b1 (h), w2 (K x h), b2 (K).
struct ModelParams {
  Arch arch = Arch::linear;
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

/// Seeded symmetric-uniform weights scaled by 1/sqrt(fan_in), zero biases.
ModelParams init_params(std::uint64_t seed_init, Arch arch, Index d, Index k, Index hidden = 0);

// Elementwise parameter arithmetic for the optimizer.
void scale_params(ModelParams& p, double factor);
void axpy_params(ModelParams& out, double factor, const ModelParams& delta);
ModelParams zeros_like(const ModelParams& p);
double param_l1_distance(const ModelParams& a, const ModelParams& b);

/// Raw scores for a batch of inputs (m x d) -> (m x K).
Matrix forward_scores(const ModelParams& params, const Matrix& inputs);

/// Row-wise softmax of temperature-scaled scores.
Matrix predict_probs(const ModelParams& params, const Matrix& inputs, double temperature = 1.0);

/// Mean regularized loss over the batch and its gradient in every parameter.
struct ClassifierGrad {
  double loss = 0.0;
  ModelParams grads;
};

ClassifierGrad classifier_loss_grad(const ModelParams& params, const Matrix& inputs,
                                    const std::vector<Index>& labels, const RegParams& reg,
                                    double temperature = 1.0);

/// A pair of linear row-normalized encoders (no bias): embeddings are
/// inputs * w^T with w of shape embed_dim x input_dim.
struct DualEncoder {
  Matrix q;
  Matrix d;
};

enum class XexVariant { sampled, snm, ce, cem };

DualEncoder init_dual_encoder(std::uint64_t seed_init, Index input_dim, Index embed_dim);

Matrix encode(const Matrix& inputs, const Matrix& w);

/// Similarity matrix of a query/doc batch under the encoder, at temperature
/// lambda with the chosen scaling.
SimilarityMatrix dual_scores(const DualEncoder& enc, const Matrix& xq, const Matrix& xd,
                             double lambda, TempScaling scaling);

/// Batch loss of the chosen cross-example variant and its gradient in both
/// encoder weight matrices, backpropagated through the row normalization.
struct DualGrad {
  double loss = 0.0;
  Matrix gq;
  Matrix gd;
};

DualGrad dual_loss_grad(const DualEncoder& enc, const Matrix& xq, const Matrix& xd,
                        XexVariant variant, const std::optional<MiningSpec>& mining,
                        double lambda, TempScaling scaling);

}  // namespace churnlab
