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

#ifndef VARTHA_TEXTPIPE_RESERVED_ROWS_HPP_
#define VARTHA_TEXTPIPE_RESERVED_ROWS_HPP_

#include <algorithm>
#include <vector>

#include "vartha/textpipe.hpp"

namespace vartha::text {

// PAD row := 0, UNK row := mean of rows 2..V-1 (0 when there are none).
inline void set_reserved_rows(EmbeddingModel& model) {
  const std::size_t V = model.vocab.size();
  const std::size_t D = model.dim;
  std::fill_n(model.matrix.begin(), 2 * D, 0.f);
  if (V <= 2) return;
  std::vector<double> mean(D, 0.0);
  for (std::size_t id = 2; id < V; ++id) {
    for (std::size_t k = 0; k < D; ++k) mean[k] += model.matrix[id * D + k];
  }
  for (std::size_t k = 0; k < D; ++k) {
    model.matrix[D + k] = static_cast<float>(mean[k] / static_cast<double>(V - 2));
  }
}

}  // namespace vartha::text

#endif  // VARTHA_TEXTPIPE_RESERVED_ROWS_HPP_
