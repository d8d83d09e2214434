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

#include <cctype>
#include <charconv>
#include <string>

#include "common/utf8.hpp"
#include "vartha/textpipe.hpp"

namespace vartha::text {
namespace {

constexpr char32_t kZwnj = 0x200C;
constexpr char32_t kZwj = 0x200D;

bool is_digit(char32_t cp) {
  return (cp >= U'0' && cp <= U'9') || (cp >= 0x0D66 && cp <= 0x0D6F);
}

bool is_malayalam(char32_t cp) { return cp >= 0x0D00 && cp <= 0x0D7F; }

bool is_latin_letter(char32_t cp) {
  return (cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z');
}

std::string strip_tags(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '<') {
      const auto close = s.find('>', i + 1);
      if (close != std::string_view::npos) {
        out.push_back(' ');
        i = close + 1;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

bool decode_entity(std::string_view name, std::string& out) {
  struct Named {
    std::string_view name;
    char32_t cp;
  };
  static constexpr Named kNamed[] = {
      {"amp", U'&'},   {"lt", U'<'},      {"gt", U'>'},     {"quot", U'"'},
      {"apos", U'\''}, {"nbsp", 0x00A0},  {"ndash", 0x2013}, {"mdash", 0x2014},
      {"hellip", 0x2026}, {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C},
      {"rdquo", 0x201D}, {"zwj", kZwj},   {"zwnj", kZwnj},
  };
  if (name.size() > 1 && name[0] == '#') {
    const bool hex = name[1] == 'x' || name[1] == 'X';
    const auto digits = name.substr(hex ? 2 : 1);
    unsigned long cp = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty() || cp > 0x10FFFF) {
      return false;
    }
    utf8::append(out, static_cast<char32_t>(cp));
    return true;
  }
  for (const auto& n : kNamed) {
    if (n.name == name) {
      utf8::append(out, n.cp);
      return true;
    }
  }
  // Unknown but well-formed named entity: drop it.
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c))) return false;
  }
  out.push_back(' ');
  return !name.empty();
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '&') {
      const auto semi = s.find(';', i + 1);
      if (semi != std::string_view::npos && semi - i <= 12 &&
          decode_entity(s.substr(i + 1, semi - i - 1), out)) {
        i = semi + 1;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

}  // namespace

std::string clean_text(std::string_view raw) {
  const auto code_points = utf8::decode(decode_entities(strip_tags(raw)));

  std::u32string filtered;
  filtered.reserve(code_points.size() + 8);
  bool in_digits = false;
  for (char32_t cp : code_points) {
    if (is_digit(cp)) {
      if (!in_digits) filtered += U" NUM ";
      in_digits = true;
      continue;
    }
    in_digits = false;
    if (is_malayalam(cp) || is_latin_letter(cp)) {
      filtered.push_back(cp);
    } else if ((cp == kZwj || cp == kZwnj) && !filtered.empty() && is_malayalam(filtered.back())) {
      filtered.push_back(cp);
    } else {
      filtered.push_back(U' ');
    }
  }

  std::u32string collapsed;
  collapsed.reserve(filtered.size());
  for (char32_t cp : filtered) {
    if (cp == U' ' && (collapsed.empty() || collapsed.back() == U' ')) continue;
    collapsed.push_back(cp);
  }
  if (!collapsed.empty() && collapsed.back() == U' ') collapsed.pop_back();
  return utf8::encode(collapsed);
}

std::vector<std::string> tokenize(std::string_view clean) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start <= clean.size()) {
    auto end = clean.find(' ', start);
    if (end == std::string_view::npos) end = clean.size();
    if (end > start) tokens.emplace_back(clean.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

}  // namespace vartha::text
