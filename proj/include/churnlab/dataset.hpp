#pragma once

#include "churnlab/types.hpp"

#include <cstdint>
#include <vector>

namespace churnlab {

struct Dataset {
  Matrix inputs;              // m x d
  std::vector<Index> labels;  // m class indices in [0, k_classes)
  Index k_classes = 0;
};

/// Class-balanced isotropic unit-variance Gaussian clusters, label i mod K,
/// with class means at pairwise distance `separation` (scaled standard
/// basis vectors, which requires d >= K unless separation is zero).
Dataset gen_gaussian_blobs(std::uint64_t seed, Index m, Index d, Index k, double separation);

struct PairedDataset {
  Matrix queries;  // n x latent_dim, view A of the latents
  Matrix docs;     // n x latent_dim, view B of the latents
  Matrix view_a;   // the fixed mixing matrices, kept so tests can invert them
  Matrix view_b;
  Index latent_dim = 0;
};

/// Matched query/document pairs: latents z_i ~ N(0, I), query view
/// A z_i + noise * eps, doc view B z_i + noise * eps', with A, B fixed
/// random per seed. Row i of queries matches row i of docs only.
PairedDataset gen_paired_embeddings(std::uint64_t seed, Index n, Index latent_dim, double noise);

/// Deterministic 80/20-style split: the first (1 - holdout_fraction) of the
/// indices train, the rest are held out. Both sides are nonempty.
struct Split {
  std::vector<Index> train;
  std::vector<Index> holdout;
};

Split holdout_split(Index m, double holdout_fraction);

Matrix take_rows(const Matrix& m, const std::vector<Index>& rows);
std::vector<Index> take_labels(const std::vector<Index>& labels, const std::vector<Index>& rows);

}  // namespace churnlab
