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

#include <cstdio>
#include <string>

#include "vartha/error.hpp"
#include "vartha/io.hpp"
#include "vartha/training.hpp"

namespace vartha::training {
namespace {

// Shortest representation that parses back to the same double.
std::string num(double v) {
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::stod(buf) == v) break;
  }
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

}  // namespace

void emit_curves(std::span<const models::EpochRecord> history, const fs::path& out_dir) {
  if (history.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot emit curves for an empty history");
  fs::create_directories(out_dir);
  nlohmann::json j = nlohmann::json::array();
  std::string loss = "epoch,train,val\n";
  std::string acc = "epoch,train,val\n";
  for (const auto& r : history) {
    j.push_back(models::to_json(r));
    loss += std::to_string(r.epoch) + "," + num(r.train_loss) + "," + opt_num(r.val_loss) + "\n";
    acc += std::to_string(r.epoch) + "," + num(r.train_accuracy) + "," + opt_num(r.val_accuracy) + "\n";
  }
  io::write_file_atomic(out_dir / "history.json", j.dump(2) + "\n");
  io::write_file_atomic(out_dir / "loss.csv", loss);
  io::write_file_atomic(out_dir / "accuracy.csv", acc);
}

}  // namespace vartha::training
