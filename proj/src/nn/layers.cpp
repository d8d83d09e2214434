/* Copyright 2026 The Vartha Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <Eigen/QR>

#include <cmath>

#include "common/rng.hpp"
#include "vartha/error.hpp"
#include "vartha/nn.hpp"

namespace vartha::nn {

void glorot_uniform(Matrix& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-limit, limit);
  }
}

void orthogonal(Matrix& m, Rng& rng) {
  const bool tall = m.rows() >= m.cols();
  Matrix g(tall ? m.rows() : m.cols(), tall ? m.cols() : m.rows());
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
  // Sign fix so the result is uniformly distributed.
  const Matrix r = qr.matrixQR().topRows(g.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    if (r(k, k) < 0) q.col(k) *= -1.0;
  }
  m = tall ? q : Matrix(q.transpose());
}

// ---------------------------------------------------------------------------

Dense::Dense(const std::string& name, int in, int out, Activation act)
    : weight(name + "/kernel", out, in), bias(name + "/bias", out, 1), activation(act) {}

void Dense::init(Rng& rng) {
  glorot_uniform(weight.value, rng);
  bias.value.setZero();
}

Matrix Dense::forward(const Matrix& x) const {
  if (x.rows() != weight.value.cols()) {
    throw Error(ErrorCode::kShapeMismatch, weight.name + ": input width " + std::to_string(x.rows()) +
                                               ", expected " + std::to_string(weight.value.cols()));
  }
  Matrix y = weight.value * x;
  y.colwise() += bias.value.col(0);
  if (activation == Activation::kRelu) y = y.cwiseMax(0.0);
  return y;
}

Matrix Dense::forward(const Matrix& x, Cache& cache) const {
  cache.input = x;
  cache.output = forward(x);
  return cache.output;
}

Matrix Dense::backward(const Matrix& d_out, const Cache& cache, bool input_grad) {
  Matrix dz = d_out;
  if (activation == Activation::kRelu) {
    dz = (cache.output.array() > 0.0).select(d_out, 0.0);
  }
  if (weight.trainable) weight.grad.noalias() += dz * cache.input.transpose();
  if (bias.trainable) bias.grad.col(0) += dz.rowwise().sum();
  if (!input_grad) return {};
  return weight.value.transpose() * dz;
}

// ---------------------------------------------------------------------------

Embedding::Embedding(const std::string& name, int vocab_size, int dim)
    : table(name + "/embeddings", dim, vocab_size) {}

Sequence Embedding::forward(const std::vector<std::vector<int>>& ids) const {
  const auto batch = static_cast<Eigen::Index>(ids.size());
  const std::size_t steps = ids.empty() ? 0 : ids.front().size();
  Sequence out(steps, Matrix(dim(), batch));
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto& row = ids[static_cast<std::size_t>(b)];
    if (row.size() != steps) throw Error(ErrorCode::kShapeMismatch, "ragged token batch");
    for (std::size_t t = 0; t < steps; ++t) {
      const int id = row[t];
      if (id < 0 || id >= vocab_size()) {
        throw Error(ErrorCode::kShapeMismatch, "token id " + std::to_string(id) + " outside vocabulary");
      }
      out[t].col(b) = table.value.col(id);
    }
  }
  return out;
}

Sequence Embedding::forward(const std::vector<std::vector<int>>& ids, Cache& cache) const {
  const std::size_t steps = ids.empty() ? 0 : ids.front().size();
  cache.ids.assign(steps, std::vector<int>(ids.size()));
  for (std::size_t b = 0; b < ids.size(); ++b) {
    for (std::size_t t = 0; t < steps && t < ids[b].size(); ++t) cache.ids[t][b] = ids[b][t];
  }
  return forward(ids);
}

void Embedding::backward(const Sequence& d_out, const Cache& cache) {
  if (!table.trainable) return;
  for (std::size_t t = 0; t < d_out.size(); ++t) {
    for (std::size_t b = 0; b < cache.ids[t].size(); ++b) {
      const int id = cache.ids[t][b];
      if (id == 0) continue;
      table.grad.col(id) += d_out[t].col(static_cast<Eigen::Index>(b));
    }
  }
}

// ---------------------------------------------------------------------------

Matrix dropout(const Matrix& x, double rate, Rng& rng, Matrix& mask) {
  mask.resize(x.rows(), x.cols());
  const double keep = 1.0 - rate;
  const double scale = keep > 0.0 ? 1.0 / keep : 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) mask(i, j) = rng.uniform() < keep ? scale : 0.0;
  }
  return x.cwiseProduct(mask);
}

Matrix softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double mx = logits.col(j).maxCoeff();
    p.col(j) = (logits.col(j).array() - mx).exp();
    p.col(j) /= p.col(j).sum();
  }
  return p;
}

Matrix softmax_backward(const Matrix& probs, const Matrix& d_probs) {
  Matrix d(probs.rows(), probs.cols());
  for (Eigen::Index j = 0; j < probs.cols(); ++j) {
    const double dot = probs.col(j).dot(d_probs.col(j));
    d.col(j) = probs.col(j).cwiseProduct((d_probs.col(j).array() - dot).matrix());
  }
  return d;
}

double softmax_cross_entropy(const Matrix& logits, const std::vector<int>& labels, Matrix* d_logits) {
  const auto batch = logits.cols();
  if (static_cast<std::size_t>(batch) != labels.size() || batch == 0) {
    throw Error(ErrorCode::kLengthMismatch, "label count does not match batch");
  }
  double loss = 0.0;
  if (d_logits) d_logits->resize(logits.rows(), batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    const int y = labels[static_cast<std::size_t>(j)];
    const double mx = logits.col(j).maxCoeff();
    const double lse = mx + std::log((logits.col(j).array() - mx).exp().sum());
    loss += lse - logits(y, j);
    if (d_logits) {
      d_logits->col(j) = (logits.col(j).array() - lse).exp();
      (*d_logits)(y, j) -= 1.0;
    }
  }
  if (d_logits) *d_logits /= static_cast<double>(batch);
  return loss / static_cast<double>(batch);
}

}  // namespace vartha::nn
