#include "mcvl/encoder.hpp"

#include "mcvl/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace mcvl::encoder {

namespace {

// k-means++ seeding over `count` points of dimension `dim`.
std::vector<float> seed_centers(const float* pts, std::size_t count,
                                std::size_t dim, std::size_t k,
                                std::mt19937_64& rng) {
  std::vector<float> centers(k * dim);
  std::uniform_int_distribution<std::size_t> first(0, count - 1);
  std::size_t pick = first(rng);
  std::copy_n(pts + pick * dim, dim, centers.begin());

  std::vector<double> d2(count);
  for (std::size_t i = 0; i < count; ++i) {
    d2[i] = kernels::l2sq(pts + i * dim, centers.data(), dim);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t j = 1; j < k; ++j) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double r = unit(rng) * total;
      double acc = 0.0;
      chosen = count - 1;
      for (std::size_t i = 0; i < count; ++i) {
        acc += d2[i];
        if (acc >= r) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = first(rng);
    }
    float* c = centers.data() + j * dim;
    std::copy_n(pts + chosen * dim, dim, c);
    for (std::size_t i = 0; i < count; ++i) {
      const double d = kernels::l2sq(pts + i * dim, c, dim);
      if (d < d2[i]) d2[i] = d;
    }
  }
  return centers;
}

}  // namespace

Vocabulary train_vocabulary(const std::vector<float>& pool, std::size_t count,
                            std::size_t dim, std::size_t k, std::uint64_t seed,
                            int max_iters) {
  if (count < k) {
    throw std::invalid_argument("train_vocabulary: pool smaller than k");
  }
  if (pool.size() != count * dim) {
    throw std::invalid_argument("train_vocabulary: pool size mismatch");
  }
  std::mt19937_64 rng(seed);
  const float* pts = pool.data();

  Vocabulary vocab;
  vocab.k = k;
  vocab.dim = dim;
  vocab.centers = seed_centers(pts, count, dim, k, rng);

  std::vector<std::size_t> assign(count);
  std::vector<double> sums(k * dim);
  std::vector<std::size_t> sizes(k);
  double prev_inertia = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < max_iters; ++iter) {
    double inertia = 0.0;
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = kernels::nearest_center(pts + i * dim,
                                                    vocab.centers.data(), k, dim);
      assign[i] = j;
      inertia += kernels::l2sq(pts + i * dim, vocab.center(j), dim);
      ++sizes[j];
      double* s = sums.data() + j * dim;
      const float* x = pts + i * dim;
      for (std::size_t c = 0; c < dim; ++c) s[c] += x[c];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (sizes[j] == 0) {
        // Re-seed from the point farthest from its assigned center.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < count; ++i) {
          const double d = kernels::l2sq(pts + i * dim,
                                         vocab.center(assign[i]), dim);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        std::copy_n(pts + far * dim, dim, vocab.centers.begin() + j * dim);
      } else {
        float* c = vocab.centers.data() + j * dim;
        const double inv = 1.0 / static_cast<double>(sizes[j]);
        const double* s = sums.data() + j * dim;
        for (std::size_t d = 0; d < dim; ++d) {
          c[d] = static_cast<float>(s[d] * inv);
        }
      }
    }
    if (std::isfinite(prev_inertia)) {
      const double rel = (prev_inertia - inertia) / std::max(prev_inertia, 1e-300);
      if (rel >= 0.0 && rel < 1e-4) break;
    }
    prev_inertia = inertia;
  }
  return vocab;
}

std::vector<float> embed_vlad(const features::DescriptorSet& ds,
                              const Vocabulary& vocab) {
  if (ds.dim != vocab.dim) {
    throw std::invalid_argument("embed_vlad: dimension mismatch");
  }
  std::vector<float> out(vocab.k * vocab.dim, 0.0f);
  const std::size_t m = ds.count();
  for (std::size_t i = 0; i < m; ++i) {
    const float* x = ds.row(i);
    const std::size_t j = kernels::nearest_center(x, vocab.centers.data(),
                                                  vocab.k, vocab.dim);
    float* block = out.data() + j * vocab.dim;
    const float* c = vocab.center(j);
    for (std::size_t d = 0; d < vocab.dim; ++d) {
      block[d] += x[d] - c[d];
    }
  }
  return out;
}

PcaModel train_pca(const std::vector<std::vector<float>>& samples,
                   std::size_t p) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("train_pca: need at least 2 samples");
  const std::size_t dim = samples[0].size();
  for (const auto& s : samples) {
    if (s.size() != dim) {
      throw std::invalid_argument("train_pca: inconsistent sample dimension");
    }
  }
  p = std::min({p, dim, n - 1});

  Eigen::MatrixXd x(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) x(i, j) = samples[i][j];
  }
  PcaModel model;
  model.mean = x.colwise().mean();
  x.rowwise() -= model.mean.transpose();

  Eigen::VectorXd eigvals(p);
  model.basis.resize(dim, p);
  const double denom = static_cast<double>(n - 1);

  if (dim <= n - 1) {
    const Eigen::MatrixXd cov = x.transpose() * x / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    for (std::size_t j = 0; j < p; ++j) {
      const Eigen::Index src = static_cast<Eigen::Index>(dim - 1 - j);
      eigvals[j] = std::max(es.eigenvalues()[src], 0.0);
      model.basis.col(j) = es.eigenvectors().col(src);
    }
  } else {
    // Gram-matrix route for n << D.
    const Eigen::MatrixXd gram = x * x.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    for (std::size_t j = 0; j < p; ++j) {
      const Eigen::Index src = static_cast<Eigen::Index>(n - 1 - j);
      const double s = std::max(es.eigenvalues()[src], 0.0);
      eigvals[j] = s / denom;
      if (s > 0.0) {
        model.basis.col(j) = x.transpose() * es.eigenvectors().col(src) / std::sqrt(s);
      } else {
        model.basis.col(j).setZero();
        model.basis(static_cast<Eigen::Index>(j % dim), static_cast<Eigen::Index>(j)) = 1.0;
      }
    }
  }
  // Deterministic sign: largest-magnitude entry of each column positive.
  for (std::size_t j = 0; j < p; ++j) {
    Eigen::Index imax = 0;
    model.basis.col(j).cwiseAbs().maxCoeff(&imax);
    if (model.basis(imax, static_cast<Eigen::Index>(j)) < 0.0) {
      model.basis.col(j) = -model.basis.col(j);
    }
  }
  model.scale.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    model.scale[j] = std::sqrt(eigvals[j]) + 1e-12;
  }
  return model;
}

GlobalDescriptor finalize(const std::vector<float>& raw, const PcaModel& pca) {
  if (raw.size() != pca.input_dim()) {
    throw std::invalid_argument("finalize: dimension mismatch");
  }
  GlobalDescriptor out;
  bool all_zero = true;
  for (float v : raw) {
    if (v != 0.0f) {
      all_zero = false;
      break;
    }
  }
  if (all_zero) {
    out.values.assign(pca.output_dim(), 0.0f);
    out.degenerate = true;
    return out;
  }
  Eigen::VectorXd v(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) v[i] = raw[i];
  Eigen::VectorXd y = (pca.basis.transpose() * (v - pca.mean)).cwiseQuotient(pca.scale);
  const double norm = y.norm();
  if (norm > 0.0) y /= norm;
  out.values.resize(pca.output_dim());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = static_cast<float>(y[i]);
  }
  out.degenerate = norm == 0.0;
  return out;
}

std::vector<float> raw_vlad(const features::GrayImage& img, const Codebook& cb) {
  features::DescriptorSet ds = features::extract_dense(img, cb.feature_config);
  features::root_sift_inplace(ds);
  return embed_vlad(ds, cb.vocabulary);
}

GlobalDescriptor encode(const features::GrayImage& img, const Codebook& cb) {
  return finalize(raw_vlad(img, cb), cb.pca);
}

}  // namespace mcvl::encoder
