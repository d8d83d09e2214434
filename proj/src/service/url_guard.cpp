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

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <string>

#include "vartha/error.hpp"
#include "vartha/service.hpp"

namespace vartha::service {
namespace {

[[noreturn]] void refuse(const std::string& why) { throw Error(ErrorCode::kInvalidArgument, why); }

bool blocked_v4(const in_addr& a) {
  const std::uint32_t h = ntohl(a.s_addr);
  return (h >> 24) == 127 || (h >> 16) == 0xA9FE || h == 0 || (h >> 24) == 0;
}

bool blocked_v6(const in6_addr& a) {
  if (IN6_IS_ADDR_LOOPBACK(&a) || IN6_IS_ADDR_LINKLOCAL(&a) || IN6_IS_ADDR_UNSPECIFIED(&a)) return true;
  if (IN6_IS_ADDR_V4MAPPED(&a)) {
    in_addr v4;
    std::memcpy(&v4, a.s6_addr + 12, 4);
    return blocked_v4(v4);
  }
  return false;
}

}  // namespace

bool is_blocked_address(std::string_view ip) {
  const std::string s(ip);
  in_addr v4;
  if (inet_pton(AF_INET, s.c_str(), &v4) == 1) return blocked_v4(v4);
  in6_addr v6;
  if (inet_pton(AF_INET6, s.c_str(), &v6) == 1) return blocked_v6(v6);
  return false;
}

void check_fetch_url(std::string_view url, bool allow_private) {
  const auto colon = url.find("://");
  if (colon == std::string_view::npos) refuse("image_url must be an absolute http(s) URL");
  std::string scheme(url.substr(0, colon));
  std::transform(scheme.begin(), scheme.end(), scheme.begin(), [](unsigned char c) { return std::tolower(c); });
  if (scheme != "http" && scheme != "https") refuse("image_url scheme '" + scheme + "' is not allowed");

  std::string_view rest = url.substr(colon + 3);
  rest = rest.substr(0, rest.find_first_of("/?#"));
  if (const auto at = rest.rfind('@'); at != std::string_view::npos) rest = rest.substr(at + 1);
  std::string host;
  if (!rest.empty() && rest.front() == '[') {
    const auto close = rest.find(']');
    if (close == std::string_view::npos) refuse("image_url has a malformed host");
    host = rest.substr(1, close - 1);
  } else {
    host = rest.substr(0, rest.find(':'));
  }
  if (host.empty()) refuse("image_url has no host");
  if (allow_private) return;

  std::string lower = host;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "localhost" || lower.ends_with(".localhost")) refuse("image_url host is a loopback name");
  if (is_blocked_address(host)) refuse("image_url points at a loopback or link-local address");

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0) {
    // Unresolvable hosts fail later as fetch errors.
    return;
  }
  bool blocked = false;
  for (auto* p = res; p; p = p->ai_next) {
    if (p->ai_family == AF_INET) blocked |= blocked_v4(reinterpret_cast<sockaddr_in*>(p->ai_addr)->sin_addr);
    if (p->ai_family == AF_INET6) blocked |= blocked_v6(reinterpret_cast<sockaddr_in6*>(p->ai_addr)->sin6_addr);
  }
  freeaddrinfo(res);
  if (blocked) refuse("image_url resolves to a loopback or link-local address");
}

}  // namespace vartha::service
