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

// Regenerates the synthetic fixture dataset and writes random conv-base
// weights for offline runs.
//
//   vartha-fixture dataset data/fixture
//   vartha-fixture weights build/vgg16_synthetic.bin --seed 1

#include <iostream>

#include "CLI11.hpp"
#include "vartha/error.hpp"
#include "vartha/fixture.hpp"
#include "vartha/imagepipe.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fixture generator", "vartha-fixture"};
  app.require_subcommand(1, 1);

  std::string dir, path;
  std::uint64_t seed = 1;
  vartha::fixture::FixtureOptions opts;
  auto* dataset = app.add_subcommand("dataset", "Write manifest.csv, manifest_16.csv and images/");
  dataset->add_option("dir", dir, "Output directory")->required();
  dataset->add_option("--per-class", opts.per_class)->capture_default_str();
  dataset->add_option("--seed", opts.seed)->capture_default_str();
  auto* weights = app.add_subcommand("weights", "Write He-normal VGG-16 conv-base weights");
  weights->add_option("path", path, "Output file")->required();
  weights->add_option("--seed", seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*dataset) {
      const auto files = vartha::fixture::write_fixture(dir, opts);
      std::cout << files.manifest.string() << "\n" << files.subset_manifest.string() << "\n";
    } else {
      vartha::image::write_synthetic_vgg16_weights(path, seed);
      std::cout << path << "\n";
    }
  } catch (const vartha::Error& e) {
    std::cerr << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
