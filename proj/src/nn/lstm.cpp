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

#include <cmath>

#include "common/rng.hpp"
#include "vartha/error.hpp"
#include "vartha/nn.hpp"

namespace vartha::nn {
namespace {

Matrix sigmoid(const Matrix& a) { return (1.0 + (-a.array()).exp()).inverse().matrix(); }

// x * m (row-broadcast) and x * (1 - m).
Matrix keep(const Matrix& x, const RowVector& m) { return (x.array().rowwise() * m.array()).matrix(); }
Matrix carry(const Matrix& x, const RowVector& m) {
  return (x.array().rowwise() * (1.0 - m.array())).matrix();
}

}  // namespace

Lstm::Lstm(const std::string& name, int input_dim, int units, bool reverse)
    : kernel(name + "/kernel", 4 * units, input_dim),
      recurrent(name + "/recurrent_kernel", 4 * units, units),
      bias(name + "/bias", 4 * units, 1),
      reverse_(reverse) {}

void Lstm::init(Rng& rng) {
  glorot_uniform(kernel.value, rng);
  orthogonal(recurrent.value, rng);
  bias.value.setZero();
  bias.value.block(units(), 0, units(), 1).setOnes();  // forget gate
}

Lstm::Output Lstm::forward(const Sequence& x, const Matrix& mask) const { return run(x, mask, nullptr); }

Lstm::Output Lstm::forward(const Sequence& x, const Matrix& mask, Cache& cache) const {
  return run(x, mask, &cache);
}

Lstm::Output Lstm::run(const Sequence& x, const Matrix& mask, Cache* cache) const {
  const int H = units();
  const auto T = x.size();
  const Eigen::Index B = T ? x.front().cols() : mask.cols();
  if (static_cast<std::size_t>(mask.rows()) != T) {
    throw Error(ErrorCode::kShapeMismatch, kernel.name + ": mask has wrong number of steps");
  }

  Output out;
  out.outputs.resize(T);
  Matrix h = Matrix::Zero(H, B);
  Matrix c = Matrix::Zero(H, B);
  if (cache) cache->steps.assign(T, Step{});

  for (std::size_t s = 0; s < T; ++s) {
    const std::size_t t = reverse_ ? T - 1 - s : s;
    if (x[t].rows() != input_dim()) {
      throw Error(ErrorCode::kShapeMismatch, kernel.name + ": input width " + std::to_string(x[t].rows()) +
                                                 ", expected " + std::to_string(input_dim()));
    }
    Matrix a = kernel.value * x[t];
    a.noalias() += recurrent.value * h;
    a.colwise() += bias.value.col(0);

    Matrix i = sigmoid(a.topRows(H));
    Matrix f = sigmoid(a.middleRows(H, H));
    Matrix g = a.middleRows(2 * H, H).array().tanh().matrix();
    Matrix o = sigmoid(a.bottomRows(H));
    const Matrix c_new = f.cwiseProduct(c) + i.cwiseProduct(g);
    Matrix tanh_c = c_new.array().tanh().matrix();
    const Matrix h_new = o.cwiseProduct(tanh_c);

    const RowVector m = mask.row(static_cast<Eigen::Index>(t));
    if (cache) {
      auto& st = cache->steps[s];
      st.x = x[t];
      st.h_prev = h;
      st.c_prev = c;
      st.i = std::move(i);
      st.f = std::move(f);
      st.g = std::move(g);
      st.o = std::move(o);
      st.tanh_c = std::move(tanh_c);
      st.mask = m;
    }
    c = keep(c_new, m) + carry(c, m);
    h = keep(h_new, m) + carry(h, m);
    out.outputs[t] = keep(h, m);
  }
  out.final_state = std::move(h);
  return out;
}

Sequence Lstm::backward(const Sequence& d_outputs, const Matrix& d_final, const Cache& cache) {
  const int H = units();
  const auto T = cache.steps.size();
  Sequence dx(T);
  Matrix dh = d_final;
  Matrix dc = Matrix::Zero(dh.rows(), dh.cols());

  for (std::size_t s = T; s-- > 0;) {
    const std::size_t t = reverse_ ? T - 1 - s : s;
    const auto& st = cache.steps[s];
    if (!d_outputs.empty()) dh += keep(d_outputs[t], st.mask);

    const Matrix dh_new = keep(dh, st.mask);
    const Matrix dc_new = keep(dc, st.mask) +
                          dh_new.cwiseProduct(st.o).cwiseProduct((1.0 - st.tanh_c.array().square()).matrix());

    Matrix da(4 * H, dh.cols());
    da.topRows(H) = dc_new.cwiseProduct(st.g).cwiseProduct(st.i.cwiseProduct((1.0 - st.i.array()).matrix()));
    da.middleRows(H, H) =
        dc_new.cwiseProduct(st.c_prev).cwiseProduct(st.f.cwiseProduct((1.0 - st.f.array()).matrix()));
    da.middleRows(2 * H, H) = dc_new.cwiseProduct(st.i).cwiseProduct((1.0 - st.g.array().square()).matrix());
    da.bottomRows(H) =
        dh_new.cwiseProduct(st.tanh_c).cwiseProduct(st.o.cwiseProduct((1.0 - st.o.array()).matrix()));

    if (kernel.trainable) kernel.grad.noalias() += da * st.x.transpose();
    if (recurrent.trainable) recurrent.grad.noalias() += da * st.h_prev.transpose();
    if (bias.trainable) bias.grad.col(0) += da.rowwise().sum();

    dx[t] = kernel.value.transpose() * da;
    Matrix dh_prev = recurrent.value.transpose() * da;
    dh_prev += carry(dh, st.mask);
    dc = dc_new.cwiseProduct(st.f) + carry(dc, st.mask);
    dh = std::move(dh_prev);
  }
  return dx;
}

// ---------------------------------------------------------------------------

BiLstm::BiLstm(const std::string& name, int input_dim, int units)
    : fwd(name + "/forward", input_dim, units, false), bwd(name + "/backward", input_dim, units, true) {}

void BiLstm::init(Rng& rng) {
  fwd.init(rng);
  bwd.init(rng);
}

std::vector<Parameter*> BiLstm::parameters() {
  auto p = fwd.parameters();
  for (auto* q : bwd.parameters()) p.push_back(q);
  return p;
}

namespace {

BiLstm::Output merge(Lstm::Output&& f, Lstm::Output&& b) {
  BiLstm::Output out;
  out.outputs.resize(f.outputs.size());
  for (std::size_t t = 0; t < f.outputs.size(); ++t) {
    out.outputs[t].resize(f.outputs[t].rows() + b.outputs[t].rows(), f.outputs[t].cols());
    out.outputs[t] << f.outputs[t], b.outputs[t];
  }
  out.final_state.resize(f.final_state.rows() + b.final_state.rows(), f.final_state.cols());
  out.final_state << f.final_state, b.final_state;
  return out;
}

}  // namespace

BiLstm::Output BiLstm::forward(const Sequence& x, const Matrix& mask) const {
  return merge(fwd.forward(x, mask), bwd.forward(x, mask));
}

BiLstm::Output BiLstm::forward(const Sequence& x, const Matrix& mask, Cache& cache) const {
  return merge(fwd.forward(x, mask, cache.forward), bwd.forward(x, mask, cache.backward));
}

Sequence BiLstm::backward(const Sequence& d_outputs, const Matrix& d_final, const Cache& cache) {
  const int H = units();
  Sequence d_fwd, d_bwd;
  if (!d_outputs.empty()) {
    d_fwd.reserve(d_outputs.size());
    d_bwd.reserve(d_outputs.size());
    for (const auto& d : d_outputs) {
      d_fwd.push_back(d.topRows(H));
      d_bwd.push_back(d.bottomRows(H));
    }
  }
  auto dx = fwd.backward(d_fwd, d_final.topRows(H), cache.forward);
  const auto dx_b = bwd.backward(d_bwd, d_final.bottomRows(H), cache.backward);
  for (std::size_t t = 0; t < dx.size(); ++t) dx[t] += dx_b[t];
  return dx;
}

}  // namespace vartha::nn
