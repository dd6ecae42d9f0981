#include "churnlab/dataset.hpp"

#include "churnlab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace churnlab {

Dataset gen_gaussian_blobs(std::uint64_t seed, Index m, Index d, Index k, double separation) {
  if (k < 2) throw std::invalid_argument("gen_gaussian_blobs: need K >= 2");
  if (m < k) throw std::invalid_argument("gen_gaussian_blobs: need m >= K");
  if (d < 1) throw std::invalid_argument("gen_gaussian_blobs: need d >= 1");
  if (!(separation >= 0.0)) throw std::invalid_argument("gen_gaussian_blobs: bad separation");
  if (separation > 0.0 && d < k)
    throw std::invalid_argument("gen_gaussian_blobs: equidistant means need d >= K");

  // Means at (separation / sqrt(2)) * e_k, so any two are `separation` apart.
  Matrix means = Matrix::Zero(k, d);
  for (Index c = 0; c < k && separation > 0.0; ++c)
    means(c, c) = separation / std::sqrt(2.0);

  Dataset ds;
  ds.k_classes = k;
  ds.inputs.resize(m, d);
  ds.labels.resize(static_cast<std::size_t>(m));
  Rng rng(mix_seed(seed, 0x626c6f62));  // "blob"
  for (Index i = 0; i < m; ++i) {
    Index label = i % k;
    ds.labels[static_cast<std::size_t>(i)] = label;
    for (Index j = 0; j < d; ++j) ds.inputs(i, j) = means(label, j) + rng.normal();
  }
  return ds;
}

PairedDataset gen_paired_embeddings(std::uint64_t seed, Index n, Index latent_dim, double noise) {
  if (n < 2) throw std::invalid_argument("gen_paired_embeddings: need n >= 2");
  if (latent_dim < 1) throw std::invalid_argument("gen_paired_embeddings: need latent_dim >= 1");
  if (!(noise >= 0.0)) throw std::invalid_argument("gen_paired_embeddings: bad noise");

  PairedDataset ds;
  ds.latent_dim = latent_dim;
  double scale = 1.0 / std::sqrt(static_cast<double>(latent_dim));
  Rng view_rng(mix_seed(seed, 0x76696577));  // "view"
  ds.view_a.resize(latent_dim, latent_dim);
  ds.view_b.resize(latent_dim, latent_dim);
  for (Index i = 0; i < latent_dim; ++i)
    for (Index j = 0; j < latent_dim; ++j) ds.view_a(i, j) = scale * view_rng.normal();
  for (Index i = 0; i < latent_dim; ++i)
    for (Index j = 0; j < latent_dim; ++j) ds.view_b(i, j) = scale * view_rng.normal();

  Rng pair_rng(mix_seed(seed, 0x70616972));  // "pair"
  ds.queries.resize(n, latent_dim);
  ds.docs.resize(n, latent_dim);
  Vector z(latent_dim);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < latent_dim; ++j) z[j] = pair_rng.normal();
    ds.queries.row(i) = (ds.view_a * z).transpose();
    ds.docs.row(i) = (ds.view_b * z).transpose();
    for (Index j = 0; j < latent_dim; ++j) ds.queries(i, j) += noise * pair_rng.normal();
    for (Index j = 0; j < latent_dim; ++j) ds.docs(i, j) += noise * pair_rng.normal();
  }
  return ds;
}

Split holdout_split(Index m, double holdout_fraction) {
  if (m < 2) throw std::invalid_argument("holdout_split: need at least two samples");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    throw std::invalid_argument("holdout_split: fraction outside (0,1)");
  auto held = static_cast<Index>(std::ceil(static_cast<double>(m) * holdout_fraction));
  held = std::max<Index>(1, std::min(held, m - 1));
  Split split;
  for (Index i = 0; i < m - held; ++i) split.train.push_back(i);
  for (Index i = m - held; i < m; ++i) split.holdout.push_back(i);
  return split;
}

Matrix take_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= m.rows()) throw std::invalid_argument("take_rows: out of range");
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  }
  return out;
}

std::vector<Index> take_labels(const std::vector<Index>& labels, const std::vector<Index>& rows) {
  std::vector<Index> out;
  out.reserve(rows.size());
  for (Index r : rows) {
    if (r < 0 || static_cast<std::size_t>(r) >= labels.size())
      throw std::invalid_argument("take_labels: out of range");
    out.push_back(labels[static_cast<std::size_t>(r)]);
  }
  return out;
}

}  // namespace churnlab
