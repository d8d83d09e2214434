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

#include "vartha/nn.hpp"

namespace vartha::nn {

Adam::Adam(std::vector<Parameter*> params, Options options) : params_(std::move(params)), opt_(options) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (auto* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

void Adam::step() {
  ++t_;
  const double t = static_cast<double>(t_);
  const double lr_t =
      opt_.learning_rate * std::sqrt(1.0 - std::pow(opt_.beta2, t)) / (1.0 - std::pow(opt_.beta1, t));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto* p = params_[k];
    if (!p->trainable) continue;
    m_[k] = opt_.beta1 * m_[k] + (1.0 - opt_.beta1) * p->grad;
    v_[k] = opt_.beta2 * v_[k] + (1.0 - opt_.beta2) * p->grad.cwiseAbs2();
    p->value.array() -= lr_t * m_[k].array() / (v_[k].array().sqrt() + opt_.epsilon);
  }
}

}  // namespace vartha::nn
