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

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "bison/error.hpp"
#include "bison/url.hpp"

namespace bison::psl {

// Trimmed snapshot of the Public Suffix List (https://publicsuffix.org/list/),
// taken 2026-09-01. Subject to the Mozilla Public License, v. 2.0.
inline constexpr std::string_view kSnapshotVersion = "2026-09-01-trimmed";
inline constexpr std::string_view kBundledSnapshot = R"PSL(

// ===BEGIN ICANN DOMAINS===
com
net
org
edu
gov
mil
int
info
biz
io
dev
app
xyz
site
online
shop
eu
us
ca
de
fr
nl
ch
at
co.at
or.at
be
se
no
dk
fi
it
es
pl
cz
ru
in
co.in
cn
com.cn
net.cn
org.cn
br
com.br
net.br
au
com.au
net.au
org.au
edu.au
nz
co.nz
org.nz
uk
ac.uk
co.uk
gov.uk
ltd.uk
me.uk
net.uk
org.uk
plc.uk
sch.uk
jp
ac.jp
co.jp
go.jp
ne.jp
or.jp
*.kawasaki.jp
!city.kawasaki.jp
*.kobe.jp
!city.kobe.jp
*.ck
!www.ck
*.bd
kr
co.kr
// ===END ICANN DOMAINS===
// ===BEGIN PRIVATE DOMAINS===
github.io
githubusercontent.com
blogspot.com
appspot.com
herokuapp.com
cloudfront.net
s3.amazonaws.com
azurewebsites.net
netlify.app
pages.dev
vercel.app
// ===END PRIVATE DOMAINS===
)PSL";

// Public-suffix lookup following the publicsuffix.org algorithm: exception
// rules win, otherwise the longest matching rule, with "*" as the implicit
// default.
class PublicSuffixList {
 public:
  static PublicSuffixList FromText(std::string_view text) {
    PublicSuffixList list;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      const auto end = line.find_first_of(" \t\r");
      line = line.substr(0, end);
      if (line.empty() || line.starts_with("//")) continue;
      line = url::ToLower(line);
      if (line.front() == '!') {
        list.exceptions_.insert(line.substr(1));
      } else if (line.starts_with("*.")) {
        list.wildcards_.insert(line.substr(2));
      } else {
        list.rules_.insert(line);
      }
    }
    return list;
  }

  static PublicSuffixList FromFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kInvalidRequest, "cannot read public suffix list " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return FromText(ss.str());
  }

  static const PublicSuffixList& Bundled() {
    static const PublicSuffixList list = FromText(kBundledSnapshot);
    return list;
  }

  // The public suffix of a domain name (lowercase, no trailing dot).
  std::string PublicSuffix(std::string_view host) const {
    const std::vector<std::string_view> labels = Split(host);
    // Walk suffixes from longest to shortest; first hit is the longest rule.
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const std::string_view candidate = Join(host, labels, i);
      if (exceptions_.contains(std::string(candidate))) return std::string(Join(host, labels, i + 1));
      if (rules_.contains(std::string(candidate))) return std::string(candidate);
      if (i + 1 < labels.size() && wildcards_.contains(std::string(Join(host, labels, i + 1)))) {
        return std::string(candidate);
      }
    }
    return labels.empty() ? std::string() : std::string(labels.back());
  }

  // Public suffix plus one label; empty if the host is itself a public suffix.
  std::string RegistrableDomain(std::string_view host) const {
    const std::string suffix = PublicSuffix(host);
    if (suffix.size() >= host.size()) return {};
    const std::string_view rest = host.substr(0, host.size() - suffix.size() - 1);
    const auto dot = rest.rfind('.');
    return std::string(dot == std::string_view::npos ? host : host.substr(dot + 1));
  }

  // "is a registrable domain suffix of or is equal to" from the HTML
  // standard's document.domain setter.
  bool IsRegistrableSuffixOrEqual(std::string_view suffix_text, std::string_view host_text) const {
    if (suffix_text.empty()) return false;
    const std::string suffix = url::ToLower(suffix_text);
    const std::string host = url::ToLower(host_text);
    if (suffix == host) return true;
    if (url::IsIpAddress(suffix) || url::IsIpAddress(host)) return false;
    if (!host.ends_with("." + suffix)) return false;
    if (PublicSuffix(suffix) == suffix) return false;
    const std::string host_ps = PublicSuffix(host);
    if (host_ps == suffix || host_ps.ends_with("." + suffix)) return false;
    return true;
  }

 private:
  static std::vector<std::string_view> Split(std::string_view host) {
    std::vector<std::string_view> labels;
    while (!host.empty()) {
      const auto dot = host.find('.');
      labels.push_back(host.substr(0, dot));
      if (dot == std::string_view::npos) break;
      host.remove_prefix(dot + 1);
    }
    return labels;
  }

  // Suffix of `host` made of labels[i..].
  static std::string_view Join(std::string_view host, const std::vector<std::string_view>& labels,
                               std::size_t i) {
    if (i >= labels.size()) return {};
    return host.substr(static_cast<std::size_t>(labels[i].data() - host.data()));
  }

  std::unordered_set<std::string> rules_;
  std::unordered_set<std::string> wildcards_;
  std::unordered_set<std::string> exceptions_;
};

}  // namespace bison::psl
