// Copyright 2026 The bison-oidc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "bison/error.hpp"

namespace bison::url {

// Query/form parameters. Ordered so serialization is deterministic.
using Params = std::map<std::string, std::string>;

inline std::string ToLower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string PercentEncode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

// Decodes %XX escapes; '+' becomes a space (form encoding).
inline std::string PercentDecode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out.push_back(' ');
    } else if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
               std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      unsigned v = 0;
      std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
      out.push_back(static_cast<char>(v));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

inline std::string EncodeParams(const Params& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    if (!out.empty()) out.push_back('&');
    out += PercentEncode(k) + "=" + PercentEncode(v);
  }
  return out;
}

// Later duplicates overwrite earlier ones.
inline Params DecodeParams(std::string_view text) {
  Params out;
  while (!text.empty()) {
    const auto amp = text.find('&');
    const std::string_view pair = text.substr(0, amp);
    if (!pair.empty()) {
      const auto eq = pair.find('=');
      if (eq == std::string_view::npos) {
        out[PercentDecode(pair)] = "";
      } else {
        out[PercentDecode(pair.substr(0, eq))] = PercentDecode(pair.substr(eq + 1));
      }
    }
    if (amp == std::string_view::npos) break;
    text.remove_prefix(amp + 1);
  }
  return out;
}

inline std::optional<int> DefaultPort(std::string_view scheme) {
  if (scheme == "http" || scheme == "ws") return 80;
  if (scheme == "https" || scheme == "wss") return 443;
  return std::nullopt;
}

// Absolute hierarchical URL, just enough for the redirects and form posts the
// protocol uses. No userinfo, no fragments.
struct Url {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path = "/";
  std::string query;

  static Url Parse(std::string_view text) {
    Url u;
    const auto sep = text.find("://");
    if (sep == std::string_view::npos || sep == 0) {
      throw Error(ErrorCode::kInvalidRequest, "not an absolute URL: " + std::string(text));
    }
    u.scheme = ToLower(text.substr(0, sep));
    std::string_view rest = text.substr(sep + 3);
    if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
    const auto path_start = rest.find_first_of("/?");
    std::string_view authority = rest.substr(0, path_start);
    std::string_view tail = path_start == std::string_view::npos ? "" : rest.substr(path_start);
    if (authority.empty() || authority.find('@') != std::string_view::npos) {
      throw Error(ErrorCode::kInvalidRequest, "bad URL authority: " + std::string(text));
    }
    std::string_view host = authority;
    std::optional<int> port;
    const auto colon = authority.rfind(':');
    const bool ipv6 = authority.front() == '[';
    if (colon != std::string_view::npos && (!ipv6 || authority[colon - 1] == ']')) {
      int p = 0;
      auto sv = authority.substr(colon + 1);
      auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), p);
      if (ec != std::errc() || ptr != sv.data() + sv.size() || p <= 0 || p > 65535) {
        throw Error(ErrorCode::kInvalidRequest, "bad URL port: " + std::string(text));
      }
      port = p;
      host = authority.substr(0, colon);
    }
    u.host = ToLower(host);
    if (port) {
      u.port = *port;
    } else if (auto d = DefaultPort(u.scheme)) {
      u.port = *d;
    } else {
      throw Error(ErrorCode::kInvalidRequest, "no port for scheme " + u.scheme);
    }
    const auto q = tail.find('?');
    u.path = std::string(tail.substr(0, q));
    if (u.path.empty()) u.path = "/";
    if (q != std::string_view::npos) u.query = std::string(tail.substr(q + 1));
    return u;
  }

  // scheme://host[:port] with the default port elided, no trailing slash.
  std::string Origin() const {
    std::string out = scheme + "://" + host;
    if (DefaultPort(scheme) != port) out += ":" + std::to_string(port);
    return out;
  }

  std::string PathAndQuery() const { return query.empty() ? path : path + "?" + query; }

  std::string ToString() const { return Origin() + PathAndQuery(); }

  Params QueryParams() const { return DecodeParams(query); }
};

inline std::string CanonicalOrigin(std::string_view text) { return Url::Parse(text).Origin(); }

inline bool IsIpAddress(std::string_view host) {
  if (!host.empty() && host.front() == '[') return true;
  if (host.empty()) return false;
  return std::all_of(host.begin(), host.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '.'; });
}

// Potentially-trustworthy origins in the sense of W3C Secure Contexts:
// https/wss, or loopback hosts.
inline bool IsPotentiallyTrustworthy(const Url& u) {
  if (u.scheme == "https" || u.scheme == "wss") return true;
  if (u.host == "localhost" || (u.host.size() > 10 && u.host.ends_with(".localhost"))) return true;
  if (u.host == "[::1]") return true;
  return IsIpAddress(u.host) && u.host.starts_with("127.");
}

}  // namespace bison::url
