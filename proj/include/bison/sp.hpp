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

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "bison/core.hpp"
#include "bison/http.hpp"
#include "bison/oidc.hpp"
#include "bison/token.hpp"

namespace bison::sp {

inline constexpr std::int64_t kPendingTtlSeconds = 600;
inline constexpr std::string_view kSessionCookie = "bison_sp_session";
inline constexpr std::string_view kReturnPath = "/return";

inline std::string RandomToken(std::size_t bytes = 32) {
  EnsureSodium();
  Bytes b(bytes);
  randombytes_buf(b.data(), b.size());
  return Base64UrlEncode(b);
}

inline std::optional<std::string> CookieValue(std::string_view header, std::string_view name) {
  while (!header.empty()) {
    const auto semi = header.find(';');
    std::string_view part = header.substr(0, semi);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    const auto eq = part.find('=');
    if (eq != std::string_view::npos && part.substr(0, eq) == name) {
      return std::string(part.substr(eq + 1));
    }
    if (semi == std::string_view::npos) break;
    header.remove_prefix(semi + 1);
  }
  return std::nullopt;
}

enum class DerivationMode { kBison, kPpidFallback };

inline std::string_view ToString(DerivationMode m) {
  return m == DerivationMode::kBison ? "bison" : "ppid-fallback";
}

struct SessionResult {
  std::string pseudonym;  // base64url element (bison) or PPID (fallback)
  DerivationMode derivation_mode = DerivationMode::kBison;
  std::string audience;

  nlohmann::json ToJson() const {
    return {{"pseudonym", pseudonym},
            {"derivation_mode", ToString(derivation_mode)},
            {"audience", audience}};
  }

  static SessionResult FromJson(const nlohmann::json& j) {
    SessionResult r;
    r.pseudonym = j.at("pseudonym").get<std::string>();
    r.derivation_mode =
        j.at("derivation_mode") == "bison" ? DerivationMode::kBison : DerivationMode::kPpidFallback;
    r.audience = j.at("audience").get<std::string>();
    return r;
  }
};

template <PrimeOrderGroup G>
struct PendingAuth {
  std::string handle;
  std::string nonce;
  std::string audience;
  std::int64_t created_at = 0;
  bool consumed = false;
  std::optional<typename G::Scalar> blind;  // replay-hardened mode only
};

// One-time nonce store. TryConsume is the only transition out of the
// unconsumed state and is atomic with respect to concurrent completions.
template <PrimeOrderGroup G>
class PendingStore {
 public:
  explicit PendingStore(std::int64_t ttl = kPendingTtlSeconds) : ttl_(ttl) {}

  void Put(PendingAuth<G> p) {
    std::lock_guard lock(mu_);
    PurgeLocked(p.created_at);
    entries_.insert_or_assign(p.handle, std::move(p));
  }

  std::optional<PendingAuth<G>> Find(const std::string& handle, std::int64_t now) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(handle);
    if (it == entries_.end() || now - it->second.created_at > ttl_) return std::nullopt;
    return it->second;
  }

  bool TryConsume(const std::string& handle) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(handle);
    if (it == entries_.end() || it->second.consumed) return false;
    it->second.consumed = true;
    return true;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

 private:
  // Consumed entries are kept until expiry so a replay is reported as such
  // rather than as an unknown handle.
  void PurgeLocked(std::int64_t now) {
    std::erase_if(entries_, [&](const auto& kv) { return now - kv.second.created_at > ttl_; });
  }

  std::int64_t ttl_;
  mutable std::mutex mu_;
  std::map<std::string, PendingAuth<G>> entries_;
};

struct SpConfig {
  std::string origin;    // this SP's user-facing origin; also its client_id
  std::string audience;  // empty: the origin itself
  bool bison_opt_in = true;
  bool sp_samples_blind = false;
  std::int64_t pending_ttl = kPendingTtlSeconds;
  std::function<std::int64_t()> clock = token::UnixNow;
};

template <PrimeOrderGroup G>
class ServiceProvider {
 public:
  struct StartedAuth {
    oidc::AuthorizationRequest request;
    std::string handle;
  };

  ServiceProvider(SpConfig config, oidc::DiscoveryDocument idp)
      : config_(std::move(config)),
        idp_(std::move(idp)),
        idp_key_(idp_.VerificationKey()),
        pending_(config_.pending_ttl) {
    config_.origin = url::CanonicalOrigin(config_.origin);
    if (config_.audience.empty()) config_.audience = config_.origin;
  }

  const SpConfig& config() const { return config_; }
  const std::string& audience() const { return config_.audience; }
  std::string ReturnUri() const { return config_.origin + std::string(kReturnPath); }

  StartedAuth StartAuth() {
    PendingAuth<G> p;
    p.handle = RandomToken();
    p.nonce = RandomToken();
    p.audience = config_.audience;
    p.created_at = config_.clock();

    oidc::AuthorizationRequest req;
    req.endpoint = idp_.authorization_endpoint;
    req.client_id = config_.origin;
    req.redirect_uri = ReturnUri();
    req.nonce = p.nonce;
    if (config_.bison_opt_in) {
      req.pairwise_subject_types = {std::string(oidc::kBisonMethod)};
      if (config_.audience != config_.origin) req.audience_id = config_.audience;
      if (config_.sp_samples_blind) {
        p.blind = RandomScalar<G>();
        req.blind = EncodeScalarB64<G>(*p.blind);
      }
    }
    StartedAuth out{req, p.handle};
    pending_.Put(std::move(p));
    return out;
  }

  // Validates a returned ID token against the pending request identified by
  // `handle` and derives the pseudonym. The pending request is consumed only
  // when every check passes.
  SessionResult CompleteAuth(std::string_view id_token, const std::optional<std::string>& blind_param,
                             const std::string& handle) {
    try {
      return CompleteAuthImpl(id_token, blind_param, handle);
    } catch (const Error& e) {
      std::lock_guard lock(log_mu_);
      failures_.push_back(e.code());
      throw;
    }
  }

  std::vector<ErrorCode> FailureLog() const {
    std::lock_guard lock(log_mu_);
    return failures_;
  }

  std::string RenderLandingPage() const {
    return "<!DOCTYPE html>\n<html><head><title>" + oidc::HtmlEscape(config_.origin) +
           "</title></head><body>\n<h1>" + oidc::HtmlEscape(config_.origin) +
           "</h1>\n<p>Audience: " + oidc::HtmlEscape(config_.audience) +
           "</p>\n<a href=\"/auth\">Log in</a>\n</body></html>\n";
  }

  void InstallRoutes(httplib::Server& svr) {
    svr.Get("/", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(RenderLandingPage(), http::ContentTypeHtml());
    });
    svr.Get("/auth", [this](const httplib::Request&, httplib::Response& res) {
      const StartedAuth started = StartAuth();
      res.set_header("Set-Cookie", std::string(kSessionCookie) + "=" + started.handle +
                                       "; Path=/; HttpOnly; Secure; SameSite=None");
      res.set_redirect(started.request.ToUrl(), 302);
    });
    svr.Post(std::string(kReturnPath), [this](const httplib::Request& req, httplib::Response& res) {
      const url::Params form = url::DecodeParams(req.body);
      const bool want_json = req.get_header_value("Accept").find("application/json") != std::string::npos;
      auto field = [&](std::string_view k) -> std::optional<std::string> {
        auto it = form.find(std::string(k));
        if (it == form.end()) return std::nullopt;
        return it->second;
      };
      try {
        const auto handle = CookieValue(req.get_header_value("Cookie"), kSessionCookie);
        if (!handle) throw Error(ErrorCode::kUnknownPending, "no session cookie");
        const auto id_token = field(oidc::param::kIdToken);
        if (!id_token) throw Error(ErrorCode::kBadToken, "missing id_token");
        const SessionResult result = CompleteAuth(*id_token, field(oidc::param::kBlind), *handle);
        if (want_json) {
          res.set_content(result.ToJson().dump(), http::ContentTypeJson());
        } else {
          res.set_content("<!DOCTYPE html>\n<html><body><h1>Welcome</h1>\n<p>Pseudonym: <code>" +
                              oidc::HtmlEscape(result.pseudonym) + "</code></p>\n<p>Derivation: " +
                              std::string(ToString(result.derivation_mode)) + "</p>\n<p>Audience: " +
                              oidc::HtmlEscape(result.audience) + "</p></body></html>\n",
                          http::ContentTypeHtml());
        }
      } catch (const Error& e) {
        res.status = 403;
        res.set_header(http::kErrorHeader, std::string(ToString(e.code())));
        if (want_json) {
          res.set_content(nlohmann::json{{"error", ToString(e.code())}, {"detail", e.what()}}.dump(),
                          http::ContentTypeJson());
        } else {
          res.set_content("<!DOCTYPE html>\n<html><body><h1>Login failed</h1><p>" +
                              oidc::HtmlEscape(e.what()) + "</p></body></html>\n",
                          http::ContentTypeHtml());
        }
      }
    });
  }

 private:
  SessionResult CompleteAuthImpl(std::string_view id_token, const std::optional<std::string>& blind_param,
                                 const std::string& handle) {
    const std::int64_t now = config_.clock();
    const auto pending = pending_.Find(handle, now);
    if (!pending) throw Error(ErrorCode::kUnknownPending, "no pending authentication for this session");
    if (pending->consumed) throw Error(ErrorCode::kReplayDetected, "nonce already redeemed");

    token::IdTokenClaims claims;
    try {
      claims = token::VerifyToken<G>(id_token, idp_key_, now, idp_.issuer);
    } catch (const Error& e) {
      throw Error(ErrorCode::kBadToken, e.what());
    }
    if (claims.iat < pending->created_at - token::kClockSkewSeconds) {
      throw Error(ErrorCode::kBadToken, "token predates the authentication request");
    }

    SessionResult result;
    result.audience = pending->audience;
    if (claims.IsBison()) {
      if (!config_.bison_opt_in) throw Error(ErrorCode::kBadToken, "unsolicited bison token");
      if (!blind_param) throw Error(ErrorCode::kBlindMismatch, "missing blind parameter");
      std::optional<typename G::Scalar> r;
      try {
        r = DecodeScalarB64<G>(*blind_param);
      } catch (const Error& e) {
        throw Error(ErrorCode::kBlindMismatch, e.what());
      }
      if (pending->blind && !(*pending->blind == *r)) {
        throw Error(ErrorCode::kBlindMismatch, "agent did not use the SP-supplied blind");
      }
      const auto aud = core::AudienceId<G>::Derive(pending->audience);
      const auto blinded_audience = DecodeElementB64<G>(claims.aud);
      if (!core::VerifyBlind<G>(aud, *r, blinded_audience)) {
        throw Error(ErrorCode::kBlindMismatch, "aud is not Blind(AudienceId, blind)");
      }
      if (claims.nonce != oidc::NonceBinding(config_.origin, pending->nonce)) {
        throw Error(ErrorCode::kNonceBindingMismatch, "nonce does not bind this SP origin and request");
      }
      if (!pending_.TryConsume(handle)) throw Error(ErrorCode::kReplayDetected, "nonce already redeemed");
      const auto pseudonym = core::Unblind<G>(DecodeElementB64<G>(claims.sub), *r);
      result.pseudonym = pseudonym.Encoded();
      result.derivation_mode = DerivationMode::kBison;
    } else {
      if (claims.aud != config_.origin) throw Error(ErrorCode::kBadToken, "aud is not our client_id");
      if (claims.nonce != pending->nonce) {
        throw Error(ErrorCode::kNonceBindingMismatch, "nonce does not match the request");
      }
      if (!pending_.TryConsume(handle)) throw Error(ErrorCode::kReplayDetected, "nonce already redeemed");
      result.pseudonym = claims.sub;
      result.derivation_mode = DerivationMode::kPpidFallback;
    }
    return result;
  }

  SpConfig config_;
  oidc::DiscoveryDocument idp_;
  token::VerificationKey idp_key_;
  PendingStore<G> pending_;
  mutable std::mutex log_mu_;
  std::vector<ErrorCode> failures_;
};

// Fetches the IdP discovery document over HTTP, as an SP does at startup.
inline oidc::DiscoveryDocument FetchDiscovery(const http::Client& client, const std::string& issuer) {
  const auto resp = client.Get(url::Url::Parse(issuer + std::string(oidc::kDiscoveryPath)));
  if (resp.status != 200) throw Error(ErrorCode::kTransport, "discovery returned " + std::to_string(resp.status));
  return oidc::DiscoveryDocument::FromJson(nlohmann::json::parse(resp.body));
}

}  // namespace bison::sp
