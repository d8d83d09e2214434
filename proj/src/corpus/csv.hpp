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

#ifndef VARTHA_CORPUS_CSV_HPP_
#define VARTHA_CORPUS_CSV_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace vartha::csv {

struct Row {
  std::vector<std::string> fields;
  bool unterminated_quote = false;
};

// RFC 4180 reader. Accepts LF or CRLF line endings and a leading UTF-8 BOM.
// Blank lines are skipped.
std::vector<Row> parse(std::string_view text);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

}  // namespace vartha::csv

#endif  // VARTHA_CORPUS_CSV_HPP_
