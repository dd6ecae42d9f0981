#include "churnlab/model.hpp"

#include "churnlab/prob.hpp"
#include "churnlab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace churnlab {

namespace {

Matrix seeded_uniform(Rng& rng, Index rows, Index cols, Index fan_in) {
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix w(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) w(i, j) = rng.uniform(-bound, bound);
  return w;
}

}  // namespace

ModelParams init_params(std::uint64_t seed_init, Arch arch, Index d, Index k, Index hidden) {
  if (d < 1 || k < 2) throw std::invalid_argument("init_params: need d >= 1 and K >= 2");
  ModelParams p;
  p.arch = arch;
  Rng rng(mix_seed(seed_init, 0x696e6974));  // "init"
  if (arch == Arch::linear) {
    p.w1 = seeded_uniform(rng, k, d, d);
    p.b1 = Vector::Zero(k);
  } else {
    if (hidden < 1) throw std::invalid_argument("init_params: mlp1 needs hidden width >= 1");
    p.w1 = seeded_uniform(rng, hidden, d, d);
    p.b1 = Vector::Zero(hidden);
    p.w2 = seeded_uniform(rng, k, hidden, hidden);
    p.b2 = Vector::Zero(k);
  }
  return p;
}

void scale_params(ModelParams& p, double factor) {
  p.w1 *= factor;
  p.b1 *= factor;
  if (p.arch == Arch::mlp1) {
    p.w2 *= factor;
    p.b2 *= factor;
  }
}

void axpy_params(ModelParams& out, double factor, const ModelParams& delta) {
  out.w1 += factor * delta.w1;
  out.b1 += factor * delta.b1;
  if (out.arch == Arch::mlp1) {
    out.w2 += factor * delta.w2;
    out.b2 += factor * delta.b2;
  }
}

ModelParams zeros_like(const ModelParams& p) {
  ModelParams z;
  z.arch = p.arch;
  z.w1 = Matrix::Zero(p.w1.rows(), p.w1.cols());
  z.b1 = Vector::Zero(p.b1.size());
  if (p.arch == Arch::mlp1) {
    z.w2 = Matrix::Zero(p.w2.rows(), p.w2.cols());
    z.b2 = Vector::Zero(p.b2.size());
  }
  return z;
}

double param_l1_distance(const ModelParams& a, const ModelParams& b) {
  double dist = (a.w1 - b.w1).cwiseAbs().sum() + (a.b1 - b.b1).cwiseAbs().sum();
  if (a.arch == Arch::mlp1)
    dist += (a.w2 - b.w2).cwiseAbs().sum() + (a.b2 - b.b2).cwiseAbs().sum();
  return dist;
}

Matrix forward_scores(const ModelParams& params, const Matrix& inputs) {
  if (inputs.cols() != params.w1.cols())
    throw std::invalid_argument("forward_scores: input dimension mismatch");
  Matrix scores = inputs * params.w1.transpose();
  scores.rowwise() += params.b1.transpose();
  if (params.arch == Arch::mlp1) {
    scores = scores.array().tanh().matrix() * params.w2.transpose();
    scores.rowwise() += params.b2.transpose();
  }
  return scores;
}

Matrix predict_probs(const ModelParams& params, const Matrix& inputs, double temperature) {
  Matrix scores = forward_scores(params, inputs);
  Matrix probs(scores.rows(), scores.cols());
  for (Index i = 0; i < scores.rows(); ++i)
    probs.row(i) = softmax(scores.row(i).transpose(), temperature).transpose();
  return probs;
}

ClassifierGrad classifier_loss_grad(const ModelParams& params, const Matrix& inputs,
                                    const std::vector<Index>& labels, const RegParams& reg,
                                    double temperature) {
  const Index m = inputs.rows();
  if (m < 1) throw std::invalid_argument("classifier_loss_grad: empty batch");
  if (static_cast<std::size_t>(m) != labels.size())
    throw std::invalid_argument("classifier_loss_grad: label count mismatch");

  ClassifierGrad out;
  out.grads = zeros_like(params);
  const double inv_m = 1.0 / static_cast<double>(m);

  if (params.arch == Arch::linear) {
    Matrix scores = forward_scores(params, inputs);
    for (Index i = 0; i < m; ++i) {
      VectorLoss vl = softmax_reg_loss_grad(scores.row(i).transpose(), labels[static_cast<std::size_t>(i)],
                                            reg, temperature);
      out.loss += vl.value * inv_m;
      out.grads.w1 += inv_m * (vl.gradient * inputs.row(i));
      out.grads.b1 += inv_m * vl.gradient;
    }
  } else {
    Matrix pre = inputs * params.w1.transpose();
    pre.rowwise() += params.b1.transpose();
    Matrix act = pre.array().tanh().matrix();
    Matrix scores = act * params.w2.transpose();
    scores.rowwise() += params.b2.transpose();
    for (Index i = 0; i < m; ++i) {
      VectorLoss vl = softmax_reg_loss_grad(scores.row(i).transpose(), labels[static_cast<std::size_t>(i)],
                                            reg, temperature);
      out.loss += vl.value * inv_m;
      out.grads.w2 += inv_m * (vl.gradient * act.row(i));
      out.grads.b2 += inv_m * vl.gradient;
      Vector hidden_grad = (params.w2.transpose() * vl.gradient).array() *
                           (1.0 - act.row(i).transpose().array().square());
      out.grads.w1 += inv_m * (hidden_grad * inputs.row(i));
      out.grads.b1 += inv_m * hidden_grad;
    }
  }
  return out;
}

DualEncoder init_dual_encoder(std::uint64_t seed_init, Index input_dim, Index embed_dim) {
  if (input_dim < 1 || embed_dim < 1)
    throw std::invalid_argument("init_dual_encoder: need positive dimensions");
  Rng rng(mix_seed(seed_init, 0x6475616c));  // "dual"
  DualEncoder enc;
  enc.q = seeded_uniform(rng, embed_dim, input_dim, input_dim);
  enc.d = seeded_uniform(rng, embed_dim, input_dim, input_dim);
  return enc;
}

Matrix encode(const Matrix& inputs, const Matrix& w) {
  if (inputs.cols() != w.cols()) throw std::invalid_argument("encode: dimension mismatch");
  return inputs * w.transpose();
}

SimilarityMatrix dual_scores(const DualEncoder& enc, const Matrix& xq, const Matrix& xd,
                             double lambda, TempScaling scaling) {
  return cosine_similarity_matrix(encode(xq, enc.q), encode(xd, enc.d), lambda, scaling);
}

namespace {

// Rows of `emb` normalized to unit length; norms returned for the backward
// pass. A zero-norm embedding row makes the loss undefined.
Matrix normalize_rows(const Matrix& emb, Vector& norms) {
  Matrix out(emb.rows(), emb.cols());
  norms.resize(emb.rows());
  for (Index i = 0; i < emb.rows(); ++i) {
    double n = emb.row(i).norm();
    if (n == 0.0) throw std::runtime_error("dual_loss_grad: zero-norm embedding");
    norms[i] = n;
    out.row(i) = emb.row(i) / n;
  }
  return out;
}

// d/d(unnormalized u) given g = d/d(u/|u|): (g - uhat (uhat . g)) / |u|.
Matrix normalize_backward(const Matrix& unit, const Vector& norms, const Matrix& g) {
  Matrix out(g.rows(), g.cols());
  for (Index i = 0; i < g.rows(); ++i) {
    double dot = unit.row(i).dot(g.row(i));
    out.row(i) = (g.row(i) - dot * unit.row(i)) / norms[i];
  }
  return out;
}

}  // namespace

DualGrad dual_loss_grad(const DualEncoder& enc, const Matrix& xq, const Matrix& xd,
                        XexVariant variant, const std::optional<MiningSpec>& mining,
                        double lambda, TempScaling scaling) {
  if (xq.rows() != xd.rows()) throw std::invalid_argument("dual_loss_grad: batch size mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("dual_loss_grad: lambda must be positive");
  double scale = scaling == TempScaling::lambda_squared ? lambda * lambda : lambda;

  Matrix eq = encode(xq, enc.q);
  Matrix ed = encode(xd, enc.d);
  Vector nq, nd;
  Matrix uq = normalize_rows(eq, nq);
  Matrix ud = normalize_rows(ed, nd);
  SimilarityMatrix s = scale * (uq * ud.transpose());

  XexLoss xl;
  switch (variant) {
    case XexVariant::sampled: xl = sampled_softmax_loss(s); break;
    case XexVariant::snm:
      if (!mining) throw std::invalid_argument("dual_loss_grad: snm needs a MiningSpec");
      xl = snm_loss(s, *mining);
      break;
    case XexVariant::ce: xl = ce_softmax_loss(s); break;
    case XexVariant::cem:
      if (!mining) throw std::invalid_argument("dual_loss_grad: cem needs a MiningSpec");
      xl = ce_mining_loss(s, *mining);
      break;
  }

  Matrix g_uq = scale * (xl.gradient * ud);
  Matrix g_ud = scale * (xl.gradient.transpose() * uq);
  Matrix g_eq = normalize_backward(uq, nq, g_uq);
  Matrix g_ed = normalize_backward(ud, nd, g_ud);

  DualGrad out;
  out.loss = xl.value;
  out.gq = g_eq.transpose() * xq;
  out.gd = g_ed.transpose() * xd;
  return out;
}

}  // namespace churnlab
