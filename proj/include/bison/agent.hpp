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
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "bison/core.hpp"
#include "bison/http.hpp"
#include "bison/oidc.hpp"
#include "bison/public_suffix.hpp"
#include "bison/sp.hpp"
#include "bison/token.hpp"

namespace bison::agent {

inline constexpr std::int64_t kRecordTtlSeconds = 300;

struct OriginContext {
  std::string current_origin;  // canonical
  bool is_secure_context = false;

  static OriginContext FromUrl(const url::Url& page) {
    return OriginContext{page.Origin(), url::IsPotentiallyTrustworthy(page)};
  }
  static OriginContext FromString(std::string_view page_url) { return FromUrl(url::Url::Parse(page_url)); }
};

template <PrimeOrderGroup G>
struct RewriteRecord {
  std::string handle;  // the rewritten nonce
  std::string original_redirect_uri;
  typename G::Scalar blind;
  std::string audience;
  std::int64_t created_at = 0;
};

enum class RewriteOutcome {
  kRewritten,
  kNotBisonRequest,    // not OIDC, or the SP did not opt in
  kNotSecureContext,
  kAudienceRefused,    // audience not authorized for the current origin
  kForeignRedirect,    // return address on another origin
};

inline std::string_view ToString(RewriteOutcome o) {
  switch (o) {
    case RewriteOutcome::kRewritten: return "rewritten";
    case RewriteOutcome::kNotBisonRequest: return "not-bison";
    case RewriteOutcome::kNotSecureContext: return "not-secure-context";
    case RewriteOutcome::kAudienceRefused: return "audience-refused";
    case RewriteOutcome::kForeignRedirect: return "foreign-redirect";
  }
  return "unknown";
}

// Called before any rewrite with the SP origin and the requested audience.
using ConsentCallback = std::function<bool(std::string_view sp_origin, std::string_view audience)>;

inline ConsentCallback AutoApprove() {
  return [](std::string_view, std::string_view) { return true; };
}

template <PrimeOrderGroup G>
struct Rewritten {
  oidc::AuthorizationRequest request;
  RewriteOutcome outcome = RewriteOutcome::kNotBisonRequest;
  std::optional<RewriteRecord<G>> record;
};

struct Forward {
  std::string target;
  url::Params fields;
  bool intercepted = false;
};

// Result of one headless login, including what was delivered to the SP so
// the attack harness can replay it.
struct FlowResult {
  RewriteOutcome rewrite = RewriteOutcome::kNotBisonRequest;
  std::optional<sp::SessionResult> session;
  std::optional<ErrorCode> error;
  std::string error_detail;
  std::string delivered_to;
  url::Params delivered_fields;
  std::string sp_cookie;  // "name=value" as set by the SP

  bool ok() const { return session.has_value(); }
};

// The protocol-aware user device. Holds no state beyond the records of
// flows currently in flight.
template <PrimeOrderGroup G>
class Agent {
 public:
  struct Options {
    std::shared_ptr<const psl::PublicSuffixList> psl;  // null: bundled snapshot
    ConsentCallback consent = AutoApprove();
    std::int64_t record_ttl = kRecordTtlSeconds;
    std::function<std::int64_t()> clock = token::UnixNow;
    // Test hook: choose r instead of sampling it.
    std::function<std::optional<typename G::Scalar>()> blind_chooser;
    // Test hook run on the final form post before it leaves the device. May
    // edit it; returning false withholds delivery (the flow result then
    // carries the captured fields).
    std::function<bool(Forward&)> before_deliver;
  };

  explicit Agent(std::shared_ptr<const http::Resolver> resolver) : Agent(std::move(resolver), Options{}) {}

  Agent(std::shared_ptr<const http::Resolver> resolver, Options options)
      : client_(std::move(resolver)), options_(std::move(options)) {}

  const psl::PublicSuffixList& suffixes() const {
    return options_.psl ? *options_.psl : psl::PublicSuffixList::Bundled();
  }

  // Audience is acceptable if it is the current origin, the origin's host,
  // or a registrable domain suffix of that host.
  bool AuthorizeAudience(std::string_view audience, const OriginContext& origin) const {
    if (!origin.is_secure_context) return false;
    if (audience == origin.current_origin) return true;
    const url::Url u = url::Url::Parse(origin.current_origin);
    return suffixes().IsRegistrableSuffixOrEqual(audience, u.host);
  }

  Rewritten<G> RewriteRequest(const oidc::AuthorizationRequest& req, const OriginContext& origin,
                              bool consent,
                              const std::optional<typename G::Scalar>& forced_blind = std::nullopt) {
    return RewriteRequest(req, origin, [consent] { return consent; }, forced_blind);
  }

  // As above, but consent is only asked for once every other check passed.
  Rewritten<G> RewriteRequest(const oidc::AuthorizationRequest& req, const OriginContext& origin,
                              const std::function<bool()>& ask_consent,
                              const std::optional<typename G::Scalar>& forced_blind) {
    Rewritten<G> out;
    out.request = req;
    if (!req.HasOpenIdScope() || !req.OptsIntoBison()) return out;
    if (!origin.is_secure_context) {
      out.outcome = RewriteOutcome::kNotSecureContext;
      return out;
    }
    const std::string audience = req.RequestedAudience();
    if (!AuthorizeAudience(audience, origin)) {
      out.outcome = RewriteOutcome::kAudienceRefused;
      return out;
    }
    try {
      if (url::CanonicalOrigin(req.redirect_uri) != origin.current_origin) {
        out.outcome = RewriteOutcome::kForeignRedirect;
        return out;
      }
    } catch (const Error&) {
      out.outcome = RewriteOutcome::kForeignRedirect;
      return out;
    }
    if (!ask_consent()) throw Error(ErrorCode::kConsentDenied, "user declined to sign in to " + audience);

    // An SP-supplied blind (replay-hardened mode) takes precedence.
    std::optional<typename G::Scalar> r = forced_blind;
    if (req.blind) r = DecodeScalarB64<G>(*req.blind);
    if (!r) r = RandomScalar<G>();

    const auto aud = core::AudienceId<G>::Derive(audience);
    oidc::AuthorizationRequest rw;
    rw.endpoint = req.endpoint;
    rw.client_id = EncodeElementB64<G>(core::BlindAudience<G>(aud, *r));
    rw.redirect_uri = std::string(oidc::kAnonymousRedirect);
    rw.nonce = oidc::NonceBinding(origin.current_origin, req.nonce);
    rw.scope = req.scope;
    rw.response_type = req.response_type;
    rw.response_mode = req.response_mode;
    rw.pairwise_subject_type = std::string(oidc::kBisonMethod);

    RewriteRecord<G> record{rw.nonce, req.redirect_uri, *r, audience, options_.clock()};
    {
      std::lock_guard lock(mu_);
      records_.insert_or_assign(record.handle, record);
    }
    out.request = std::move(rw);
    out.outcome = RewriteOutcome::kRewritten;
    out.record = std::move(record);
    return out;
  }

  // Return leg. Posts to the constant anonymous target are redirected to
  // the original redirect_uri with the blind attached; anything else passes
  // through untouched.
  Forward HandleReturn(std::string_view post_target, const url::Params& fields) {
    std::string canonical;
    try {
      const url::Url u = url::Url::Parse(post_target);
      canonical = u.Origin() + u.path;
    } catch (const Error&) {
      return Forward{std::string(post_target), fields, false};
    }
    if (canonical != oidc::kAnonymousRedirect) return Forward{std::string(post_target), fields, false};

    auto it = fields.find(std::string(oidc::param::kIdToken));
    if (it == fields.end()) throw Error(ErrorCode::kUnknownReturn, "return without id_token");
    std::string handle;
    try {
      handle = token::SignedIdToken::Parse(it->second).claims.nonce;
    } catch (const Error& e) {
      throw Error(ErrorCode::kUnknownReturn, e.what());
    }

    std::optional<RewriteRecord<G>> record;
    {
      std::lock_guard lock(mu_);
      auto rec = records_.find(handle);
      if (rec == records_.end()) throw Error(ErrorCode::kUnknownReturn, "no flow in progress for this token");
      record = std::move(rec->second);
      records_.erase(rec);
    }
    if (options_.clock() - record->created_at > options_.record_ttl) {
      throw Error(ErrorCode::kStaleRecord, "flow timed out");
    }
    Forward fwd{record->original_redirect_uri, fields, true};
    fwd.fields[std::string(oidc::param::kBlind)] = EncodeScalarB64<G>(record->blind);
    return fwd;
  }

  std::size_t InFlightCount() const {
    std::lock_guard lock(mu_);
    return records_.size();
  }

  // Drives a complete login the way a browser would: visit the SP's login
  // URL, follow the redirect to the IdP (rewriting it when applicable),
  // choose `account`, and deliver the form post back to the SP.
  FlowResult RunFlow(const std::string& sp_login_url, const std::string& account) {
    FlowResult result;
    try {
      RunFlowImpl(url::Url::Parse(sp_login_url), account, result);
    } catch (const Error& e) {
      result.error = e.code();
      result.error_detail = e.what();
    }
    return result;
  }

  // POSTs form fields to `target` with the SP session cookie, returning the
  // SP's verdict. Also used by the harness to replay deliveries.
  FlowResult Deliver(const std::string& target, const url::Params& fields, const std::string& cookie) const {
    FlowResult result;
    result.delivered_to = target;
    result.delivered_fields = fields;
    result.sp_cookie = cookie;
    try {
      httplib::Headers headers{{"Accept", "application/json"}};
      if (!cookie.empty()) headers.emplace("Cookie", cookie);
      const auto resp = client_.PostForm(url::Url::Parse(target), fields, headers);
      RecordResponse(resp, result);
    } catch (const Error& e) {
      result.error = e.code();
      result.error_detail = e.what();
    }
    return result;
  }

 private:
  static void RecordResponse(const http::Response& resp, FlowResult& result) {
    if (resp.status == 200) {
      result.session = sp::SessionResult::FromJson(nlohmann::json::parse(resp.body));
      return;
    }
    ErrorCode code = ErrorCode::kTransport;
    if (!ParseErrorCode(resp.Header(http::kErrorHeader), code)) code = ErrorCode::kTransport;
    result.error = code;
    result.error_detail = "HTTP " + std::to_string(resp.status);
  }

  void RunFlowImpl(const url::Url& start, const std::string& account, FlowResult& result) {
    // 1. SP login: expect a redirect to the IdP.
    const auto sp_resp = client_.Get(start);
    if (sp_resp.status != 302) throw Error(ErrorCode::kTransport, "SP did not redirect");
    const std::string set_cookie = sp_resp.Header("Set-Cookie");
    const std::string cookie = set_cookie.substr(0, set_cookie.find(';'));
    const std::string sp_origin = start.Origin();
    result.sp_cookie = cookie;

    // 2. Intercept the authorization request.
    const auto original = oidc::AuthorizationRequest::FromUrl(sp_resp.Header("Location"));
    const OriginContext origin = OriginContext::FromUrl(start);
    std::optional<typename G::Scalar> chosen;
    if (options_.blind_chooser) chosen = options_.blind_chooser();
    auto ask = [&] { return options_.consent(origin.current_origin, original.RequestedAudience()); };
    auto rw = RewriteRequest(original, origin, ask, chosen);
    result.rewrite = rw.outcome;
    // Unless rewritten this is plain OIDC, forwarded as the SP wrote it.
    const oidc::AuthorizationRequest outgoing = rw.request;

    // 3. IdP account chooser, then sign-in.
    const url::Url idp_url = url::Url::Parse(outgoing.ToUrl());
    const auto login_page = client_.Get(idp_url);
    if (login_page.status != 200) throw Error(ErrorCode::kTransport, "IdP login page unavailable");
    auto login_form = oidc::ParseFirstForm(login_page.body);
    if (!login_form) throw Error(ErrorCode::kTransport, "IdP login page has no form");
    login_form->fields[std::string(oidc::param::kAccount)] = account;
    const url::Url login_target = url::Url::Parse(idp_url.Origin() + login_form->action);
    const auto idp_resp = client_.PostForm(login_target, login_form->fields);
    if (idp_resp.status != 200) {
      ErrorCode code = ErrorCode::kTransport;
      ParseErrorCode(idp_resp.Header(http::kErrorHeader), code);
      throw Error(code, "IdP refused sign-in (HTTP " + std::to_string(idp_resp.status) + ")");
    }
    const auto post = oidc::ParseFirstForm(idp_resp.body);
    if (!post) throw Error(ErrorCode::kTransport, "IdP response has no form_post");

    // 4. Return leg.
    Forward fwd = HandleReturn(post->action, post->fields);
    if (options_.before_deliver && !options_.before_deliver(fwd)) {
      result.delivered_to = fwd.target;
      result.delivered_fields = fwd.fields;
      return;
    }
    std::string send_cookie;
    if (url::CanonicalOrigin(fwd.target) == sp_origin) send_cookie = cookie;
    FlowResult delivered = Deliver(fwd.target, fwd.fields, send_cookie);
    delivered.rewrite = result.rewrite;
    delivered.sp_cookie = cookie;
    result = std::move(delivered);
  }

  http::Client client_;
  Options options_;
  mutable std::mutex mu_;
  std::map<std::string, RewriteRecord<G>> records_;
};

}  // namespace bison::agent
