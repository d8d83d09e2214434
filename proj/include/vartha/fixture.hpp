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

#ifndef VARTHA_FIXTURE_HPP_
#define VARTHA_FIXTURE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vartha/corpus.hpp"

// Small synthetic dataset for offline tests and the quickstart: Malayalam
// headlines drawn from class-leaning word lists, and PNG images whose
// palette and shapes depend on the label.
namespace vartha::fixture {

namespace fs = std::filesystem;

struct FixtureOptions {
  std::size_t per_class = 20;
  std::size_t subset_per_class = 8;
  std::uint64_t seed = 7;
  std::string host = "fixture.vartha.invalid";
};

struct FixtureFiles {
  fs::path manifest;         // all records
  fs::path subset_manifest;  // first subset_per_class of each class
  fs::path image_dir;        // <image_name> files, ready as an image cache
};

// Records interleaved by class (fake, not fake, fake, ...).
std::vector<corpus::NewsRecord> fixture_records(const FixtureOptions& options = {});

// PNG bytes for the index-th record of a class.
std::string render_image(corpus::Label label, std::size_t index, std::uint64_t seed);

/// Writes manifest.csv, manifest_16.csv (named for the default subset) and
/// images/ under `dir`.
FixtureFiles write_fixture(const fs::path& dir, const FixtureOptions& options = {});

}  // namespace vartha::fixture

#endif  // VARTHA_FIXTURE_HPP_
