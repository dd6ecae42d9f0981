#include "churnlab/train.hpp"

#include "churnlab/dataset.hpp"
#include "churnlab/rng.hpp"

#include <cmath>

namespace churnlab {

namespace {

// Epoch visit order: a fresh Fisher-Yates shuffle per epoch from one
// generator seeded by seed_shuffle, so the full order sequence is a pure
// function of that seed.
std::vector<Index> epoch_order(Rng& rng, Index m) {
  std::vector<Index> order(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  return order;
}

bool finite_params(const ModelParams& p) {
  return p.w1.allFinite() && p.b1.allFinite() && p.w2.allFinite() && p.b2.allFinite();
}

}  // namespace

TrainedModel train_classifier(const TrainConfig& config, const Matrix& inputs,
                              const std::vector<Index>& labels, Index k_classes) {
  config.validate();
  const Index m = inputs.rows();
  if (m < 1) throw std::invalid_argument("train_classifier: empty dataset");
  if (labels.size() != static_cast<std::size_t>(m))
    throw std::invalid_argument("train_classifier: label count mismatch");
  for (Index y : labels)
    if (y < 0 || y >= k_classes) throw std::invalid_argument("train_classifier: label out of range");

  TrainedModel tm;
  tm.params = init_params(config.seed_init, config.arch, inputs.cols(), k_classes, config.hidden);
  ModelParams velocity = zeros_like(tm.params);
  Rng shuffle_rng(mix_seed(config.seed_shuffle, 0x73687566));  // "shuf"

  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<Index> order = epoch_order(shuffle_rng, m);
    double epoch_total = 0.0;
    for (Index start = 0; start < m; start += config.batch_size) {
      Index count = std::min(config.batch_size, m - start);
      std::vector<Index> batch(order.begin() + start, order.begin() + start + count);
      ClassifierGrad cg = classifier_loss_grad(tm.params, take_rows(inputs, batch),
                                               take_labels(labels, batch), config.reg,
                                               config.temperature);
      if (!std::isfinite(cg.loss)) throw TrainingFailure(epoch);
      epoch_total += cg.loss * static_cast<double>(count);
      scale_params(velocity, config.momentum);
      axpy_params(velocity, 1.0, cg.grads);
      axpy_params(tm.params, -config.learning_rate, velocity);
      // a diverging run can overflow the parameters before the loss itself
      // goes non-finite; flag it at the step that broke them
      if (!finite_params(tm.params)) throw TrainingFailure(epoch);
    }
    tm.epoch_loss.push_back(epoch_total / static_cast<double>(m));
  }
  return tm;
}

TrainedDual train_dual_encoder(const TrainConfig& config, const Matrix& queries,
                               const Matrix& docs) {
  config.validate();
  const Index n = queries.rows();
  if (n < 2) throw std::invalid_argument("train_dual_encoder: need at least two pairs");
  if (docs.rows() != n || docs.cols() != queries.cols())
    throw std::invalid_argument("train_dual_encoder: query/doc shape mismatch");

  TrainedDual td;
  td.enc = init_dual_encoder(config.seed_init, queries.cols(), config.embed_dim);
  Matrix vel_q = Matrix::Zero(td.enc.q.rows(), td.enc.q.cols());
  Matrix vel_d = Matrix::Zero(td.enc.d.rows(), td.enc.d.cols());
  Rng shuffle_rng(mix_seed(config.seed_shuffle, 0x73687566));  // "shuf"

  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<Index> order = epoch_order(shuffle_rng, n);
    double epoch_total = 0.0;
    for (Index start = 0; start < n; start += config.batch_size) {
      Index count = std::min(config.batch_size, n - start);
      if (count < 2) continue;  // a single pair has no negatives to rank against
      std::vector<Index> batch(order.begin() + start, order.begin() + start + count);
      DualGrad dg = dual_loss_grad(td.enc, take_rows(queries, batch), take_rows(docs, batch),
                                   config.xex, config.mining, config.temperature, config.scaling);
      if (!std::isfinite(dg.loss)) throw TrainingFailure(epoch);
      epoch_total += dg.loss * static_cast<double>(count);
      vel_q = config.momentum * vel_q + dg.gq;
      vel_d = config.momentum * vel_d + dg.gd;
      td.enc.q -= config.learning_rate * vel_q;
      td.enc.d -= config.learning_rate * vel_d;
      if (!td.enc.q.allFinite() || !td.enc.d.allFinite()) throw TrainingFailure(epoch);
    }
    td.epoch_loss.push_back(epoch_total / static_cast<double>(n));
  }
  return td;
}

}  // namespace churnlab
