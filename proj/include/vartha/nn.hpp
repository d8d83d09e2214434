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

#ifndef VARTHA_NN_HPP_
#define VARTHA_NN_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace vartha {
class Rng;
}

// Minimal layer library with explicit forward/backward passes. Activations
// are laid out one sample per column. Inference-mode forward passes are
// const and touch no shared state, so a finished network can serve
// concurrent callers.
namespace vartha::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Sequence = std::vector<Matrix>;  // one (features x batch) matrix per step

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
  std::size_t size() const { return static_cast<std::size_t>(value.size()); }
};

enum class Activation { kLinear, kRelu };

void glorot_uniform(Matrix& m, Rng& rng);
void orthogonal(Matrix& m, Rng& rng);

class Dense {
 public:
  struct Cache {
    Matrix input;
    Matrix output;
  };

  Dense() = default;
  Dense(const std::string& name, int in, int out, Activation act);

  void init(Rng& rng);
  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, Cache& cache) const;
  // Accumulates parameter gradients; returns d(input), or an empty matrix
  // when `input_grad` is false.
  Matrix backward(const Matrix& d_out, const Cache& cache, bool input_grad = true);

  int in() const { return static_cast<int>(weight.value.cols()); }
  int out() const { return static_cast<int>(weight.value.rows()); }
  std::vector<Parameter*> parameters() { return {&weight, &bias}; }
  std::size_t parameter_count() const { return weight.size() + bias.size(); }

  Parameter weight;  // out x in
  Parameter bias;    // out x 1
  Activation activation = Activation::kLinear;
};

// Index 0 is padding: its column stays zero and never receives gradient.
class Embedding {
 public:
  struct Cache {
    std::vector<std::vector<int>> ids;  // [time][batch]
  };

  Embedding() = default;
  Embedding(const std::string& name, int vocab_size, int dim);

  // ids[b][t]; returns one (dim x batch) matrix per time step.
  Sequence forward(const std::vector<std::vector<int>>& ids) const;
  Sequence forward(const std::vector<std::vector<int>>& ids, Cache& cache) const;
  void backward(const Sequence& d_out, const Cache& cache);

  int vocab_size() const { return static_cast<int>(table.value.cols()); }
  int dim() const { return static_cast<int>(table.value.rows()); }
  std::vector<Parameter*> parameters() { return {&table}; }
  std::size_t parameter_count() const { return table.size(); }

  Parameter table;  // dim x vocab
};

/// Standard LSTM cell (sigmoid input/forget/output gates, tanh candidate),
/// gate blocks ordered i, f, g, o. Masked steps (mask == 0) carry the
/// previous state forward and emit zeros.
class Lstm {
 public:
  struct Step {
    Matrix x, h_prev, c_prev, i, f, g, o, tanh_c;
    RowVector mask;
  };
  struct Cache {
    std::vector<Step> steps;  // processing order
  };
  struct Output {
    Sequence outputs;  // indexed by time, masked
    Matrix final_state;
  };

  Lstm() = default;
  Lstm(const std::string& name, int input_dim, int units, bool reverse);

  void init(Rng& rng);
  Output forward(const Sequence& x, const Matrix& mask) const;
  Output forward(const Sequence& x, const Matrix& mask, Cache& cache) const;
  // d_outputs may be empty when only the final state is consumed.
  Sequence backward(const Sequence& d_outputs, const Matrix& d_final, const Cache& cache);

  int units() const { return static_cast<int>(recurrent.value.cols()); }
  int input_dim() const { return static_cast<int>(kernel.value.cols()); }
  bool reverse() const { return reverse_; }
  std::vector<Parameter*> parameters() { return {&kernel, &recurrent, &bias}; }
  std::size_t parameter_count() const { return kernel.size() + recurrent.size() + bias.size(); }

  Parameter kernel;     // 4H x D
  Parameter recurrent;  // 4H x H
  Parameter bias;       // 4H x 1

 private:
  Output run(const Sequence& x, const Matrix& mask, Cache* cache) const;
  bool reverse_ = false;
};

// Forward and reverse LSTMs with their outputs stacked (width 2 * units).
class BiLstm {
 public:
  struct Cache {
    Lstm::Cache forward, backward;
  };
  struct Output {
    Sequence outputs;    // (2H x batch) per step
    Matrix final_state;  // (2H x batch): forward end state over reverse end state
  };

  BiLstm() = default;
  BiLstm(const std::string& name, int input_dim, int units);

  void init(Rng& rng);
  Output forward(const Sequence& x, const Matrix& mask) const;
  Output forward(const Sequence& x, const Matrix& mask, Cache& cache) const;
  Sequence backward(const Sequence& d_outputs, const Matrix& d_final, const Cache& cache);

  int units() const { return fwd.units(); }
  int output_width() const { return 2 * fwd.units(); }
  std::vector<Parameter*> parameters();
  std::size_t parameter_count() const { return fwd.parameter_count() + bwd.parameter_count(); }

  Lstm fwd, bwd;
};

// Inverted dropout. Returns the scaled output and fills `mask` (already
// including the 1/(1-rate) factor).
Matrix dropout(const Matrix& x, double rate, Rng& rng, Matrix& mask);

// Column-wise softmax.
Matrix softmax(const Matrix& logits);

// Jacobian-vector product of a column-wise softmax: d(logits) given d(probs).
Matrix softmax_backward(const Matrix& probs, const Matrix& d_probs);

/// Mean categorical cross-entropy of softmax(logits) against integer labels.
/// When d_logits is non-null it receives (p - onehot) / batch.
double softmax_cross_entropy(const Matrix& logits, const std::vector<int>& labels,
                             Matrix* d_logits = nullptr);

/// Adam with bias correction folded into the step size:
///   lr_t = lr * sqrt(1 - b2^t) / (1 - b1^t)
///   p   -= lr_t * m / (sqrt(v) + eps)
class Adam {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
  };

  Adam(std::vector<Parameter*> params, Options options);

  void step();
  void zero_grad();
  std::int64_t iterations() const { return t_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Matrix> m_, v_;
  Options opt_;
  std::int64_t t_ = 0;
};

}  // namespace vartha::nn

#endif  // VARTHA_NN_HPP_
