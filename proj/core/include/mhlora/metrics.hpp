// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <vector>

#include <Eigen/Dense>

namespace mhlora {

// Unit-norm embeddings, one per row, with optional per-row class labels.
struct EmbeddingSet {
  Eigen::MatrixXd vectors;
  std::vector<int> labels;  // empty or one per row

  int size() const { return static_cast<int>(vectors.rows()); }
  int dim() const { return static_cast<int>(vectors.cols()); }
  bool labeled() const { return !labels.empty(); }

  // Throws ParameterError unless every row has unit norm (1e-6), D >= 2 and
  // the label count matches.
  void validate() const;

  // Rows carrying the given label.
  EmbeddingSet subset(int label) const;
};

// Shrinkage added to both covariance estimates before the Frechet distance.
inline constexpr double kCovarianceShrinkage = 1e-6;

// 1 - <u, v> for unit vectors; exactly 0 when u and v are identical.
double cosine_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// Frechet distance between Gaussian fits (sample mean, unbiased covariance
// plus shrinkage * I) of two point sets given as rows. The cross term uses the
// symmetric eigendecomposition of S1^{1/2} S2 S1^{1/2}.
double frechet_distance(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2,
                        double shrinkage = kCovarianceShrinkage);
double frechet_distance(const EmbeddingSet& s1, const EmbeddingSet& s2,
                        double shrinkage = kCovarianceShrinkage);

// Median over points of the cosine distance to the nearest other point.
double class_radius(const EmbeddingSet& real);

// Fraction of anchor points with at least one `other` point within distance rho.
double coverage(const EmbeddingSet& anchor, const EmbeddingSet& other, double rho);

// 100 * cos(mean(S), mean(R)); centroids are not renormalised.
double centroid_similarity(const EmbeddingSet& synth, const EmbeddingSet& real);

// Mean over images of 100 * <phi(x), class_vec>.
double score_analog(const EmbeddingSet& images, const Eigen::VectorXd& class_vec);

struct ClassGap {
  int class_id = 0;
  int n_real = 0;
  int n_synth = 0;
  double rho = 0.0;
  double frechet = 0.0;
  double cov_real_by_synth = 0.0;  // Cov(R; S)
  double cov_synth_by_real = 0.0;  // Cov(S; R)
  double centroid_sim = 0.0;
  double score = 0.0;
};

struct GapReport {
  std::vector<ClassGap> classes;
  ClassGap average;  // class_id = -1, counts summed
  // The class radius is computed per class from the real set.
  bool per_class_radius = true;
};

// Per-class metrics for every class present in `synth`; both sets must be
// labeled. class_vecs maps class id to its unit score direction (classes
// missing from the map get score 0).
GapReport build_report(const EmbeddingSet& real, const EmbeddingSet& synth,
                       const std::map<int, Eigen::VectorXd>& class_vecs);

}  // namespace mhlora
