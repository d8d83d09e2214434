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

#ifndef VARTHA_CLI_OPTIONS_HPP_
#define VARTHA_CLI_OPTIONS_HPP_

#include "CLI11.hpp"
#include "vartha/cli.hpp"

namespace vartha::cli {

// Registers every RunConfig field on `app` as --<key>, with VARTHA_<KEY>
// as the environment fallback.
void add_options(CLI::App& app, RunConfig& cfg);

}  // namespace vartha::cli

#endif  // VARTHA_CLI_OPTIONS_HPP_
