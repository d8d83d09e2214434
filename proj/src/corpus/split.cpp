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

#include <algorithm>
#include <cmath>

#include "common/rng.hpp"
#include "vartha/corpus.hpp"

namespace vartha::corpus {

DatasetSplit split_dataset(std::span<const NewsRecord> records, double test_fraction,
                           std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "test_fraction must lie in (0, 1)");
  }
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_class[static_cast<int>(records[i].label)].push_back(i);
  }
  for (const auto& members : by_class) {
    if (members.size() < 2) {
      throw Error(ErrorCode::kTooFewRecords, "each class needs at least 2 records");
    }
  }

  std::vector<bool> in_test(records.size(), false);
  Rng rng(seed);
  for (auto& members : by_class) {
    const auto n = static_cast<long long>(members.size());
    const auto k = std::clamp(std::llround(static_cast<double>(n) * test_fraction), 1LL, n - 1);
    rng.shuffle(members);
    for (long long j = 0; j < k; ++j) in_test[members[j]] = true;
  }

  DatasetSplit split;
  split.seed = seed;
  split.test_fraction = test_fraction;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (in_test[i] ? split.test : split.train).push_back(records[i]);
  }
  return split;
}

}  // namespace vartha::corpus
