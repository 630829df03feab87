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

#include <array>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "bison/core.hpp"
#include "bison/http.hpp"
#include "bison/oidc.hpp"
#include "bison/token.hpp"

namespace bison::idp {

inline constexpr std::size_t kSeedBytes = 32;

struct UserRecord {
  std::string account_label;
  std::array<std::uint8_t, kSeedBytes> seed{};
  bool suspended = false;

  static UserRecord Generate(std::string label) {
    EnsureSodium();
    UserRecord u;
    u.account_label = std::move(label);
    randombytes_buf(u.seed.data(), u.seed.size());
    return u;
  }
};

// {"users": [{"account_label": ..., "seed": <base64url 32 bytes>, "suspended": bool}]}
inline std::vector<UserRecord> UsersFromJson(const nlohmann::json& j) {
  std::vector<UserRecord> users;
  try {
    for (const auto& entry : j.at("users")) {
      UserRecord u;
      u.account_label = entry.at("account_label").get<std::string>();
      const Bytes seed = Base64UrlDecode(entry.at("seed").get<std::string>());
      if (seed.size() != kSeedBytes) {
        throw Error(ErrorCode::kMalformedEncoding, "seed for " + u.account_label + " is not 32 bytes");
      }
      std::copy(seed.begin(), seed.end(), u.seed.begin());
      u.suspended = entry.value("suspended", false);
      users.push_back(std::move(u));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedEncoding, std::string("user file: ") + e.what());
  }
  return users;
}

inline nlohmann::json UsersToJson(const std::vector<UserRecord>& users) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& u : users) {
    arr.push_back({{"account_label", u.account_label},
                   {"seed", Base64UrlEncode(u.seed)},
                   {"suspended", u.suspended}});
  }
  return {{"users", arr}};
}

inline std::vector<UserRecord> LoadUsers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidRequest, "cannot open user file " + path);
  try {
    return UsersFromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedEncoding, std::string("user file: ") + e.what());
  }
}

inline void SaveUsers(const std::string& path, const std::vector<UserRecord>& users) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidRequest, "cannot write user file " + path);
  out << UsersToJson(users).dump(2) << "\n";
}

// The three fixed demo identities.
inline std::vector<UserRecord> DefaultUsers() {
  return {UserRecord::Generate("alice"), UserRecord::Generate("bob"), UserRecord::Generate("carol")};
}

struct IdpConfig {
  std::string issuer;  // public base URL, e.g. https://idp.example
  // client_id -> permitted redirect_uris, consulted only for plain OIDC.
  std::map<std::string, std::vector<std::string>> registered_clients;
  std::int64_t token_lifetime = token::kDefaultLifetimeSeconds;
  std::function<std::int64_t()> clock = token::UnixNow;
};

struct AuthorizationResponse {
  token::SignedIdToken token;
  std::string compact_token;
  oidc::HtmlForm form;  // form_post to redirect_uri
  std::string html;
};

// Mock identity provider. Authentication is an explicit choice between the
// configured accounts; everything after that is real: BlindEval for BISON
// requests, pairwise identifiers otherwise, Ed25519-signed ID tokens.
template <PrimeOrderGroup G>
class IdentityProvider {
 public:
  IdentityProvider(IdpConfig config, std::vector<UserRecord> users, token::SigningKey key)
      : config_(std::move(config)), signing_key_(std::move(key)) {
    config_.issuer = url::CanonicalOrigin(config_.issuer);
    for (auto& u : users) {
      Account a{u, G::HashToScalar(u.seed)};
      order_.push_back(u.account_label);
      accounts_.emplace(u.account_label, std::move(a));
    }
  }

  const IdpConfig& config() const { return config_; }

  oidc::DiscoveryDocument Discovery() const {
    return oidc::DiscoveryDocument{
        config_.issuer, config_.issuer + std::string(oidc::kAuthorizationPath),
        {{"keys", nlohmann::json::array({signing_key_.Public().ToJwk()})}},
        {std::string(oidc::kBisonMethod)}};
  }

  std::vector<std::string> AccountLabels() const { return order_; }

  void SetSuspended(const std::string& label, bool suspended) {
    std::unique_lock lock(mu_);
    FindLocked(label).record.suspended = suspended;
  }

  // Exposed for tests that check pseudonyms against userId . AudienceId.
  typename G::Scalar UserId(const std::string& label) const {
    std::shared_lock lock(mu_);
    return FindLocked(label).user_id;
  }

  std::array<std::uint8_t, kSeedBytes> UserSeed(const std::string& label) const {
    std::shared_lock lock(mu_);
    return FindLocked(label).record.seed;
  }

  // Every authorization request parameter set this IdP has seen.
  std::vector<url::Params> RequestLog() const {
    std::lock_guard lock(log_mu_);
    return log_;
  }

  void LogRequest(const url::Params& params) const {
    std::lock_guard lock(log_mu_);
    log_.push_back(params);
  }

  static std::string PpidFallback(std::string_view client_id, std::span<const std::uint8_t> seed) {
    return oidc::Ppid(client_id, seed);
  }

  void ValidateRequest(const oidc::AuthorizationRequest& req) const {
    if (!req.HasOpenIdScope()) throw Error(ErrorCode::kInvalidRequest, "scope must contain openid");
    if (req.response_type != "id_token") {
      throw Error(ErrorCode::kInvalidRequest, "only response_type=id_token is supported");
    }
    if (req.nonce.empty()) throw Error(ErrorCode::kInvalidRequest, "nonce is required");
    if (req.client_id.empty() || req.redirect_uri.empty()) {
      throw Error(ErrorCode::kInvalidRequest, "client_id and redirect_uri are required");
    }
  }

  AuthorizationResponse HandleAuthorization(const oidc::AuthorizationRequest& req,
                                            const std::string& account) const {
    ValidateRequest(req);
    std::optional<typename G::Element> blinded_audience;
    if (req.RequestsBison()) {
      // Reject before touching any account data.
      try {
        blinded_audience = DecodeElementB64<G>(req.client_id);
      } catch (const Error& e) {
        throw Error(ErrorCode::kMalformedBlindedAudience, e.what());
      }
    } else {
      // The redirect target can only be checked when the client is known;
      // in BISON mode it is the constant anonymous target.
      auto it = config_.registered_clients.find(req.client_id);
      if (it == config_.registered_clients.end() ||
          std::find(it->second.begin(), it->second.end(), req.redirect_uri) == it->second.end()) {
        throw Error(ErrorCode::kInvalidRequest, "redirect_uri not registered for client");
      }
    }

    std::optional<typename G::Scalar> user_id;
    std::array<std::uint8_t, kSeedBytes> seed{};
    {
      std::shared_lock lock(mu_);
      const Account& acct = FindLocked(account);
      if (acct.record.suspended) {
        throw Error(ErrorCode::kSuspendedAccount, "account '" + account + "' is suspended");
      }
      user_id = acct.user_id;
      seed = acct.record.seed;
    }

    token::IdTokenClaims claims;
    claims.iss = config_.issuer;
    claims.nonce = req.nonce;
    claims.iat = config_.clock();
    claims.exp = claims.iat + config_.token_lifetime;
    if (blinded_audience) {
      const auto b = core::BlindEval<G>(*blinded_audience, *user_id);
      claims.aud = EncodeElementB64<G>(*blinded_audience);
      claims.sub = EncodeElementB64<G>(b);
      claims.pairwise_subject_type = std::string(oidc::kBisonMethod);
    } else {
      claims.aud = req.client_id;
      claims.sub = PpidFallback(req.client_id, seed);
    }

    AuthorizationResponse resp;
    resp.token = token::IssueToken<G>(claims, signing_key_);
    resp.compact_token = resp.token.Serialize();
    resp.form.action = req.redirect_uri;
    resp.form.fields[std::string(oidc::param::kIdToken)] = resp.compact_token;
    resp.html = oidc::RenderAutoPostForm(resp.form, "Returning to service");
    return resp;
  }

  // Account chooser. Echoes the request parameters as hidden fields so the
  // POST carries them back.
  std::string RenderLoginPage(const url::Params& params) const {
    std::string html = "<!DOCTYPE html>\n<html><head><title>Sign in</title></head><body>\n";
    html += "<h1>Sign in to " + oidc::HtmlEscape(config_.issuer) + "</h1>\n<dl>\n";
    for (const auto& [k, v] : params) {
      html += "<dt>" + oidc::HtmlEscape(k) + "</dt><dd>" + oidc::HtmlEscape(v) + "</dd>\n";
    }
    html += "</dl>\n<form method=\"post\" action=\"" + std::string(oidc::kAuthorizationPath) + "\">\n";
    for (const auto& [k, v] : params) {
      html += "<input type=\"hidden\" name=\"" + oidc::HtmlEscape(k) + "\" value=\"" +
              oidc::HtmlEscape(v) + "\"/>\n";
    }
    bool first = true;
    for (const auto& label : order_) {
      html += "<label><input type=\"radio\" name=\"account\" value=\"" + oidc::HtmlEscape(label) +
              "\"" + (first ? " checked" : "") + "/> " + oidc::HtmlEscape(label) + "</label><br/>\n";
      first = false;
    }
    html += "<button type=\"submit\">Sign in</button>\n</form>\n</body></html>\n";
    return html;
  }

  void InstallRoutes(httplib::Server& svr) const {
    svr.Get(std::string(oidc::kDiscoveryPath), [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(Discovery().ToJson().dump(), http::ContentTypeJson());
    });
    svr.Get(std::string(oidc::kAuthorizationPath), [this](const httplib::Request& req, httplib::Response& res) {
      url::Params params;
      for (const auto& [k, v] : req.params) params[k] = v;
      LogRequest(params);
      res.set_content(RenderLoginPage(params), http::ContentTypeHtml());
    });
    svr.Post(std::string(oidc::kAuthorizationPath), [this](const httplib::Request& req, httplib::Response& res) {
      url::Params params = url::DecodeParams(req.body);
      const std::string account = params[std::string(oidc::param::kAccount)];
      params.erase(std::string(oidc::param::kAccount));
      LogRequest(params);
      try {
        const auto request = oidc::AuthorizationRequest::FromParams(
            config_.issuer + std::string(oidc::kAuthorizationPath), params);
        const auto resp = HandleAuthorization(request, account);
        res.set_content(resp.html, http::ContentTypeHtml());
      } catch (const Error& e) {
        res.status = e.code() == ErrorCode::kSuspendedAccount ? 403 : 400;
        res.set_header(http::kErrorHeader, std::string(ToString(e.code())));
        res.set_content("<!DOCTYPE html>\n<html><body><h1>Sign-in refused</h1><p>" +
                            oidc::HtmlEscape(e.what()) + "</p></body></html>\n",
                        http::ContentTypeHtml());
      }
    });
  }

 private:
  struct Account {
    UserRecord record;
    typename G::Scalar user_id;
  };

  const Account& FindLocked(const std::string& label) const {
    auto it = accounts_.find(label);
    if (it == accounts_.end()) throw Error(ErrorCode::kUnknownAccount, "no account '" + label + "'");
    return it->second;
  }
  Account& FindLocked(const std::string& label) {
    auto it = accounts_.find(label);
    if (it == accounts_.end()) throw Error(ErrorCode::kUnknownAccount, "no account '" + label + "'");
    return it->second;
  }

  IdpConfig config_;
  token::SigningKey signing_key_;
  std::vector<std::string> order_;
  std::map<std::string, Account> accounts_;
  mutable std::shared_mutex mu_;
  mutable std::mutex log_mu_;
  mutable std::vector<url::Params> log_;
};

}  // namespace bison::idp
