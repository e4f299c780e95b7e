// Copyright 2026 The mhlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "mhlora/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "mhlora/errors.hpp"

namespace mhlora {

void EmbeddingSet::validate() const {
  if (vectors.cols() < 2) throw ParameterError("embeddings need dimension >= 2");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != vectors.rows())
    throw ParameterError("label count does not match the number of embeddings");
  for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
    if (std::abs(vectors.row(i).norm() - 1.0) > 1e-6)
      throw ParameterError("embedding " + std::to_string(i) + " is not unit-norm");
  }
}

EmbeddingSet EmbeddingSet::subset(int label) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) rows.push_back(static_cast<Eigen::Index>(i));
  EmbeddingSet out;
  out.vectors.resize(static_cast<Eigen::Index>(rows.size()), vectors.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.vectors.row(static_cast<Eigen::Index>(i)) = vectors.row(rows[i]);
  out.labels.assign(rows.size(), label);
  return out;
}

namespace {

void require_unit(const Eigen::VectorXd& v) {
  if (std::abs(v.norm() - 1.0) > 1e-6)
    throw ParameterError("cosine distance requires unit-norm vectors");
}

// Distance without re-validating; callers have validated whole sets.
double cosine_distance_unchecked(const Eigen::Ref<const Eigen::RowVectorXd>& u,
                                 const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  if (u == v) return 0.0;
  return std::clamp(1.0 - u.dot(v), 0.0, 2.0);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

GaussianFit fit(const Eigen::MatrixXd& s, double shrinkage) {
  if (s.rows() < 2) throw SampleSizeError("Gaussian fit needs at least 2 samples");
  GaussianFit g;
  g.mean = s.colwise().mean().transpose();
  const Eigen::MatrixXd centred = s.rowwise() - g.mean.transpose();
  g.cov = (centred.transpose() * centred) / static_cast<double>(s.rows() - 1);
  g.cov.diagonal().array() += shrinkage;
  return g;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-8) throw NumericalError("covariance has a negative eigenvalue");
  return es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

double cosine_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw DimensionError("cosine distance of vectors of different size");
  require_unit(u);
  require_unit(v);
  return cosine_distance_unchecked(u.transpose(), v.transpose());
}

double frechet_distance(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2, double shrinkage) {
  if (s1.cols() != s2.cols()) throw DimensionError("Frechet distance of sets with different dimension");
  const GaussianFit g1 = fit(s1, shrinkage);
  const GaussianFit g2 = fit(s2, shrinkage);

  const Eigen::MatrixXd root1 = psd_sqrt(g1.cov);
  Eigen::MatrixXd middle = root1 * g2.cov * root1;
  middle = 0.5 * (middle + middle.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(middle, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-8) throw NumericalError("covariance product has a negative eigenvalue");
  const double trace_sqrt = ev.cwiseMax(0.0).cwiseSqrt().sum();

  const double mean_term = (g1.mean - g2.mean).squaredNorm();
  const double fd = mean_term + g1.cov.trace() + g2.cov.trace() - 2.0 * trace_sqrt;
  return std::max(fd, 0.0);
}

double frechet_distance(const EmbeddingSet& s1, const EmbeddingSet& s2, double shrinkage) {
  return frechet_distance(s1.vectors, s2.vectors, shrinkage);
}

double class_radius(const EmbeddingSet& real) {
  if (real.size() < 2) throw SampleSizeError("class radius needs at least 2 real points");
  real.validate();
  std::vector<double> nn(static_cast<std::size_t>(real.size()));
  for (int i = 0; i < real.size(); ++i) {
    double best = 2.0;
    for (int j = 0; j < real.size(); ++j) {
      if (i == j) continue;
      best = std::min(best, cosine_distance_unchecked(real.vectors.row(i), real.vectors.row(j)));
    }
    nn[static_cast<std::size_t>(i)] = best;
  }
  return median(std::move(nn));
}

double coverage(const EmbeddingSet& anchor, const EmbeddingSet& other, double rho) {
  if (anchor.size() == 0) throw SampleSizeError("coverage is undefined for an empty anchor set");
  if (!(rho >= 0.0)) throw ParameterError("coverage radius must be nonnegative");
  anchor.validate();
  other.validate();
  if (anchor.dim() != other.dim()) throw DimensionError("coverage of sets with different dimension");
  int covered = 0;
  for (int i = 0; i < anchor.size(); ++i) {
    for (int j = 0; j < other.size(); ++j) {
      if (cosine_distance_unchecked(anchor.vectors.row(i), other.vectors.row(j)) <= rho) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / anchor.size();
}

double centroid_similarity(const EmbeddingSet& synth, const EmbeddingSet& real) {
  if (synth.size() == 0 || real.size() == 0)
    throw SampleSizeError("centroid similarity needs nonempty sets");
  if (synth.dim() != real.dim()) throw DimensionError("centroid similarity of sets with different dimension");
  const Eigen::RowVectorXd cs = synth.vectors.colwise().mean();
  const Eigen::RowVectorXd cr = real.vectors.colwise().mean();
  const double ns = cs.norm();
  const double nr = cr.norm();
  if (!(ns > 0.0) || !(nr > 0.0)) throw NumericalError("degenerate set: zero centroid");
  if (cs == cr) return 100.0;
  return 100.0 * cs.dot(cr) / (ns * nr);
}

double score_analog(const EmbeddingSet& images, const Eigen::VectorXd& class_vec) {
  if (images.size() == 0) throw SampleSizeError("score analog needs at least one image");
  if (class_vec.size() != images.dim()) throw DimensionError("class vector has the wrong dimension");
  return 100.0 * (images.vectors * class_vec).mean();
}

GapReport build_report(const EmbeddingSet& real, const EmbeddingSet& synth,
                       const std::map<int, Eigen::VectorXd>& class_vecs) {
  if (!real.labeled() || !synth.labeled()) throw DataError("gap report needs labeled embeddings");
  real.validate();
  synth.validate();
  if (real.dim() != synth.dim()) throw DimensionError("real and synthetic embeddings differ in dimension");

  const std::set<int> real_classes(real.labels.begin(), real.labels.end());
  const std::set<int> synth_classes(synth.labels.begin(), synth.labels.end());
  for (int c : synth_classes)
    if (!real_classes.count(c))
      throw DataError("class " + std::to_string(c) + " appears in the synthetic set but not the real set");

  GapReport report;
  report.average.class_id = -1;
  for (int c : synth_classes) {
    const EmbeddingSet r = real.subset(c);
    const EmbeddingSet s = synth.subset(c);
    ClassGap g;
    g.class_id = c;
    g.n_real = r.size();
    g.n_synth = s.size();
    g.rho = class_radius(r);
    g.frechet = frechet_distance(r, s);
    g.cov_real_by_synth = coverage(r, s, g.rho);
    g.cov_synth_by_real = coverage(s, r, g.rho);
    g.centroid_sim = centroid_similarity(s, r);
    const auto it = class_vecs.find(c);
    g.score = it == class_vecs.end() ? 0.0 : score_analog(s, it->second);
    report.classes.push_back(g);
  }

  if (!report.classes.empty()) {
    ClassGap& a = report.average;
    for (const ClassGap& g : report.classes) {
      a.n_real += g.n_real;
      a.n_synth += g.n_synth;
      a.rho += g.rho;
      a.frechet += g.frechet;
      a.cov_real_by_synth += g.cov_real_by_synth;
      a.cov_synth_by_real += g.cov_synth_by_real;
      a.centroid_sim += g.centroid_sim;
      a.score += g.score;
    }
    const double n = static_cast<double>(report.classes.size());
    a.rho /= n;
    a.frechet /= n;
    a.cov_real_by_synth /= n;
    a.cov_synth_by_real /= n;
    a.centroid_sim /= n;
    a.score /= n;
  }
  return report;
}

}  // namespace mhlora
