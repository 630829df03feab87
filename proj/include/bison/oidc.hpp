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

#include <nlohmann/json.hpp>

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bison/encoding.hpp"
#include "bison/error.hpp"
#include "bison/token.hpp"
#include "bison/url.hpp"

// Wire-level pieces of the OpenID Connect extension shared by the identity
// provider, the service provider and the user agent.
namespace bison::oidc {

inline constexpr std::string_view kBisonMethod = "bison";
// Constant return target substituted by the agent. .invalid never resolves.
inline constexpr std::string_view kAnonymousRedirect = "https://anonymous.invalid/bison";
inline constexpr std::string_view kDiscoveryPath = "/.well-known/openid-configuration";
inline constexpr std::string_view kAuthorizationPath = "/login";

namespace param {
inline constexpr std::string_view kScope = "scope";
inline constexpr std::string_view kClientId = "client_id";
inline constexpr std::string_view kRedirectUri = "redirect_uri";
inline constexpr std::string_view kNonce = "nonce";
inline constexpr std::string_view kResponseType = "response_type";
inline constexpr std::string_view kResponseMode = "response_mode";
inline constexpr std::string_view kPairwiseSubjectType = "pairwise_subject_type";
inline constexpr std::string_view kPairwiseSubjectTypes = "pairwise_subject_types";
inline constexpr std::string_view kAudienceId = "audience_id";
inline constexpr std::string_view kBlind = "blind";
inline constexpr std::string_view kIdToken = "id_token";
inline constexpr std::string_view kAccount = "account";
}  // namespace param

inline std::vector<std::string> SplitSpaces(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

inline std::string JoinSpaces(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

// base64url(SHA-512(origin || nonce)). Ties the token the IdP signs to both
// the SP's one-time nonce and the origin the user actually saw.
inline std::string NonceBinding(std::string_view origin, std::string_view nonce) {
  if (nonce.empty()) throw Error(ErrorCode::kInvalidRequest, "empty nonce");
  const Sha512Digest d = Sha512Concat({AsBytes(origin), AsBytes(nonce)});
  return Base64UrlEncode(d);
}

// Classic pairwise identifier: base64url(SHA-512(client_id || seed)).
inline std::string Ppid(std::string_view client_id, std::span<const std::uint8_t> user_seed) {
  const Sha512Digest d = Sha512Concat({AsBytes(client_id), user_seed});
  return Base64UrlEncode(d);
}

struct AuthorizationRequest {
  std::string endpoint;  // authorization endpoint, no query
  std::string client_id;
  std::string redirect_uri;
  std::string nonce;
  std::string scope = "openid";
  std::string response_type = "id_token";
  std::string response_mode = "form_post";
  std::optional<std::string> pairwise_subject_type;
  std::vector<std::string> pairwise_subject_types;
  std::optional<std::string> audience_id;
  std::optional<std::string> blind;  // SP-chosen blind, replay-hardened mode only

  bool HasOpenIdScope() const {
    const auto scopes = SplitSpaces(scope);
    return std::find(scopes.begin(), scopes.end(), "openid") != scopes.end();
  }

  bool OptsIntoBison() const {
    return std::find(pairwise_subject_types.begin(), pairwise_subject_types.end(), kBisonMethod) !=
           pairwise_subject_types.end();
  }

  bool RequestsBison() const { return pairwise_subject_type == kBisonMethod; }

  // The audience the SP asks for: the audience_id override, else client_id.
  const std::string& RequestedAudience() const { return audience_id ? *audience_id : client_id; }

  url::Params ToParams() const {
    url::Params p{{std::string(param::kClientId), client_id},
                  {std::string(param::kRedirectUri), redirect_uri},
                  {std::string(param::kNonce), nonce},
                  {std::string(param::kScope), scope},
                  {std::string(param::kResponseType), response_type},
                  {std::string(param::kResponseMode), response_mode}};
    if (pairwise_subject_type) p[std::string(param::kPairwiseSubjectType)] = *pairwise_subject_type;
    if (!pairwise_subject_types.empty()) {
      p[std::string(param::kPairwiseSubjectTypes)] = JoinSpaces(pairwise_subject_types);
    }
    if (audience_id) p[std::string(param::kAudienceId)] = *audience_id;
    if (blind) p[std::string(param::kBlind)] = *blind;
    return p;
  }

  static AuthorizationRequest FromParams(std::string endpoint, const url::Params& p) {
    AuthorizationRequest r;
    r.endpoint = std::move(endpoint);
    auto get = [&](std::string_view k) -> std::optional<std::string> {
      auto it = p.find(std::string(k));
      if (it == p.end()) return std::nullopt;
      return it->second;
    };
    r.client_id = get(param::kClientId).value_or("");
    r.redirect_uri = get(param::kRedirectUri).value_or("");
    r.nonce = get(param::kNonce).value_or("");
    r.scope = get(param::kScope).value_or("");
    r.response_type = get(param::kResponseType).value_or("");
    r.response_mode = get(param::kResponseMode).value_or("");
    r.pairwise_subject_type = get(param::kPairwiseSubjectType);
    if (auto types = get(param::kPairwiseSubjectTypes)) r.pairwise_subject_types = SplitSpaces(*types);
    r.audience_id = get(param::kAudienceId);
    r.blind = get(param::kBlind);
    return r;
  }

  std::string ToUrl() const { return endpoint + "?" + url::EncodeParams(ToParams()); }

  static AuthorizationRequest FromUrl(std::string_view text) {
    const url::Url u = url::Url::Parse(text);
    return FromParams(u.Origin() + u.path, u.QueryParams());
  }
};

struct DiscoveryDocument {
  std::string issuer;
  std::string authorization_endpoint;
  nlohmann::json jwks;
  std::vector<std::string> pairwise_subject_types;

  bool SupportsBison() const {
    return std::find(pairwise_subject_types.begin(), pairwise_subject_types.end(), kBisonMethod) !=
           pairwise_subject_types.end();
  }

  token::VerificationKey VerificationKey() const { return token::VerificationKey::FromJwks(jwks); }

  nlohmann::json ToJson() const {
    return {{"issuer", issuer},
            {"authorization_endpoint", authorization_endpoint},
            {"jwks", jwks},
            {"response_types_supported", {"id_token"}},
            {"response_modes_supported", {"form_post"}},
            {"subject_types_supported", {"pairwise"}},
            {"id_token_signing_alg_values_supported", {token::kAlgorithm}},
            {"pairwise_subject_types", pairwise_subject_types}};
  }

  static DiscoveryDocument FromJson(const nlohmann::json& j) {
    try {
      DiscoveryDocument d;
      d.issuer = j.at("issuer").get<std::string>();
      d.authorization_endpoint = j.at("authorization_endpoint").get<std::string>();
      d.jwks = j.at("jwks");
      d.pairwise_subject_types =
          j.value("pairwise_subject_types", std::vector<std::string>{});
      return d;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidRequest, std::string("discovery document: ") + e.what());
    }
  }
};

inline std::string HtmlEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string HtmlUnescape(std::string_view s) {
  static constexpr std::pair<std::string_view, char> kEntities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&#39;", '\''}};
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    bool matched = false;
    if (s[i] == '&') {
      for (const auto& [ent, ch] : kEntities) {
        if (s.substr(i, ent.size()) == ent) {
          out.push_back(ch);
          i += ent.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(s[i++]);
  }
  return out;
}

// An HTML form reduced to what a user agent needs to submit it.
struct HtmlForm {
  std::string method = "post";
  std::string action;
  url::Params fields;
};

// Self-submitting form for response_mode=form_post.
inline std::string RenderAutoPostForm(const HtmlForm& form, std::string_view title) {
  std::string html = "<!DOCTYPE html>\n<html><head><title>" + HtmlEscape(title) +
                     "</title></head>\n<body onload=\"document.forms[0].submit()\">\n"
                     "<form method=\"" + HtmlEscape(form.method) + "\" action=\"" +
                     HtmlEscape(form.action) + "\">\n";
  for (const auto& [k, v] : form.fields) {
    html += "<input type=\"hidden\" name=\"" + HtmlEscape(k) + "\" value=\"" + HtmlEscape(v) + "\"/>\n";
  }
  html += "<noscript><button type=\"submit\">Continue</button></noscript>\n</form>\n</body></html>\n";
  return html;
}

namespace detail {
inline std::optional<std::string> Attribute(std::string_view tag, std::string_view name) {
  const std::string needle = " " + std::string(name) + "=\"";
  const auto pos = tag.find(needle);
  if (pos == std::string_view::npos) return std::nullopt;
  const auto start = pos + needle.size();
  const auto end = tag.find('"', start);
  if (end == std::string_view::npos) return std::nullopt;
  return HtmlUnescape(tag.substr(start, end - start));
}
}  // namespace detail

// Extracts the first <form> and its named <input> values. Only understands
// the markup this project renders (double-quoted attributes).
inline std::optional<HtmlForm> ParseFirstForm(std::string_view html) {
  const auto form_start = html.find("<form");
  if (form_start == std::string_view::npos) return std::nullopt;
  const auto form_tag_end = html.find('>', form_start);
  const auto form_end = html.find("</form>", form_start);
  if (form_tag_end == std::string_view::npos || form_end == std::string_view::npos) return std::nullopt;
  HtmlForm form;
  const std::string_view tag = html.substr(form_start, form_tag_end - form_start);
  form.action = detail::Attribute(tag, "action").value_or("");
  form.method = url::ToLower(detail::Attribute(tag, "method").value_or("get"));
  std::string_view body = html.substr(form_tag_end, form_end - form_tag_end);
  for (auto pos = body.find("<input"); pos != std::string_view::npos; pos = body.find("<input", pos + 1)) {
    const auto end = body.find('>', pos);
    const std::string_view input = body.substr(pos, end - pos);
    auto name = detail::Attribute(input, "name");
    if (!name) continue;
    const std::string type = detail::Attribute(input, "type").value_or("text");
    if (type == "radio" && input.find(" checked") == std::string_view::npos) continue;
    form.fields[*name] = detail::Attribute(input, "value").value_or("");
  }
  return form;
}

}  // namespace bison::oidc
