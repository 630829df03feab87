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

#include <chrono>
#include <future>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "bison/agent.hpp"
#include "bison/core.hpp"
#include "bison/http.hpp"
#include "bison/idp.hpp"
#include "bison/oidc.hpp"
#include "bison/sp.hpp"
#include "bison/test_group.hpp"

// In-process deployments and the adversary, statistics and benchmark
// scenarios that run against them. Everything talks real HTTP over loopback.
namespace bison::harness {

inline constexpr std::string_view kIdpIssuer = "https://idp.example";
inline constexpr std::string_view kGenuineOrigin = "https://login.example.com";
inline constexpr std::string_view kSharedAudience = "example.com";

struct DeploymentOptions {
  std::string idp_issuer = std::string(kIdpIssuer);
  std::vector<sp::SpConfig> service_providers = {
      sp::SpConfig{std::string(kGenuineOrigin), std::string(kSharedAudience)}};
  std::vector<idp::UserRecord> users = idp::DefaultUsers();
  // 0: ephemeral. Otherwise fixed ports, IdP first then SPs in order.
  std::vector<int> ports;
};

template <PrimeOrderGroup G>
class Deployment {
 public:
  explicit Deployment(DeploymentOptions options = {})
      : resolver_(std::make_shared<http::Resolver>()), options_(std::move(options)) {
    idp::IdpConfig idp_config;
    idp_config.issuer = options_.idp_issuer;
    for (const auto& c : options_.service_providers) {
      const std::string origin = url::CanonicalOrigin(c.origin);
      idp_config.registered_clients[origin].push_back(origin + std::string(sp::kReturnPath));
    }
    idp_ = std::make_unique<idp::IdentityProvider<G>>(idp_config, options_.users,
                                                       token::SigningKey::Generate());
    idp_server_.server().set_keep_alive_max_count(1);
    idp_->InstallRoutes(idp_server_.server());
    resolver_->Register(options_.idp_issuer, idp_server_.Start(PortAt(0)));

    const http::Client client(resolver_);
    const auto discovery = sp::FetchDiscovery(client, idp_->config().issuer);
    for (std::size_t i = 0; i < options_.service_providers.size(); ++i) {
      auto provider = std::make_unique<sp::ServiceProvider<G>>(options_.service_providers[i], discovery);
      auto server = std::make_unique<http::ServerThread>();
      provider->InstallRoutes(server->server());
      resolver_->Register(provider->config().origin, server->Start(PortAt(i + 1)));
      sps_.push_back(std::move(provider));
      sp_servers_.push_back(std::move(server));
    }
  }

  std::shared_ptr<http::Resolver> resolver() const { return resolver_; }
  idp::IdentityProvider<G>& identity_provider() { return *idp_; }
  sp::ServiceProvider<G>& service_provider(std::size_t i = 0) { return *sps_.at(i); }
  int sp_port(std::size_t i = 0) const { return sp_servers_.at(i)->port(); }
  int idp_port() const { return idp_server_.port(); }
  std::size_t sp_count() const { return sps_.size(); }

  std::string LoginUrl(std::size_t i = 0) const { return sps_.at(i)->config().origin + "/auth"; }

  agent::Agent<G> NewAgent(typename agent::Agent<G>::Options options = {}) const {
    return agent::Agent<G>(resolver_, std::move(options));
  }

  // Extra loopback server, e.g. an attacker.
  // Publish() it once started.
  http::ServerThread& AddServer() {
    extra_.push_back(std::make_unique<http::ServerThread>());
    return *extra_.back();
  }
  void Publish(const std::string& origin, int port) { resolver_->Register(origin, port); }

 private:
  int PortAt(std::size_t i) const { return i < options_.ports.size() ? options_.ports[i] : 0; }

  std::shared_ptr<http::Resolver> resolver_;
  DeploymentOptions options_;
  std::unique_ptr<idp::IdentityProvider<G>> idp_;
  http::ServerThread idp_server_;
  std::vector<std::unique_ptr<sp::ServiceProvider<G>>> sps_;
  std::vector<std::unique_ptr<http::ServerThread>> sp_servers_;
  std::vector<std::unique_ptr<http::ServerThread>> extra_;
};

// Relays a genuine SP's authorization request from another origin and
// forwards whatever comes back, i.e. a same-audience man in the middle.
// The genuine SP is reached directly by port.
inline void InstallRelay(httplib::Server& svr, const std::string& relay_origin, int genuine_port,
                         const std::string& genuine_host) {
  struct State {
    std::mutex mu;
    std::map<std::string, std::string> genuine_cookie;  // relay session -> SP cookie
  };
  auto state = std::make_shared<State>();
  auto genuine = [genuine_port] {
    auto c = std::make_unique<httplib::Client>("127.0.0.1", genuine_port);
    c->set_follow_location(false);
    return c;
  };
  svr.Get("/auth", [=](const httplib::Request&, httplib::Response& res) {
    auto resp = genuine()->Get("/auth", httplib::Headers{{"Host", genuine_host}});
    if (!resp || resp->status != 302) {
      res.status = 502;
      return;
    }
    auto req = oidc::AuthorizationRequest::FromUrl(resp->get_header_value("Location"));
    req.redirect_uri = relay_origin + std::string(sp::kReturnPath);
    const std::string sid = sp::RandomToken(16);
    const std::string cookie = resp->get_header_value("Set-Cookie");
    {
      std::lock_guard lock(state->mu);
      state->genuine_cookie[sid] = cookie.substr(0, cookie.find(';'));
    }
    res.set_header("Set-Cookie", "relay=" + sid + "; Path=/");
    res.set_redirect(req.ToUrl(), 302);
  });
  svr.Post(std::string(sp::kReturnPath), [=](const httplib::Request& req, httplib::Response& res) {
    const auto sid = sp::CookieValue(req.get_header_value("Cookie"), "relay");
    std::string cookie;
    {
      std::lock_guard lock(state->mu);
      if (sid && state->genuine_cookie.contains(*sid)) cookie = state->genuine_cookie[*sid];
    }
    auto resp = genuine()->Post(std::string(sp::kReturnPath),
                                httplib::Headers{{"Host", genuine_host},
                                                 {"Cookie", cookie},
                                                 {"Accept", req.get_header_value("Accept")}},
                                req.body, "application/x-www-form-urlencoded");
    if (!resp) {
      res.status = 502;
      return;
    }
    res.status = resp->status;
    if (resp->has_header(http::kErrorHeader)) {
      res.set_header(http::kErrorHeader, resp->get_header_value(http::kErrorHeader));
    }
    res.set_content(resp->body, resp->get_header_value("Content-Type"));
  });
}

// ---------------------------------------------------------------------------
// Attack scenarios

struct ScenarioReport {
  std::string name;
  std::string expected;  // error class, or "success" for control runs
  std::string observed;
  bool passed = false;
};

inline std::string Observed(const agent::FlowResult& r) {
  if (r.ok()) return "success";
  return r.error ? std::string(ToString(*r.error)) : "no-result";
}

inline ScenarioReport Expect(std::string name, std::string expected, std::string observed) {
  ScenarioReport rep{std::move(name), std::move(expected), std::move(observed)};
  rep.passed = rep.expected == rep.observed;
  return rep;
}

// Starts a fresh pending authentication at the SP and returns its cookie.
inline std::string FreshSpSession(const http::Client& client, const std::string& login_url) {
  const auto resp = client.Get(url::Url::Parse(login_url));
  const std::string set_cookie = resp.Header("Set-Cookie");
  return set_cookie.substr(0, set_cookie.find(';'));
}

template <PrimeOrderGroup G>
std::vector<ScenarioReport> RunReplayAttack() {
  std::vector<ScenarioReport> out;
  Deployment<G> dep;
  auto ua = dep.NewAgent();
  const auto honest = ua.RunFlow(dep.LoginUrl(), "alice");
  out.push_back(Expect("replay/control", "success", Observed(honest)));

  // Same token, same blind, same session.
  out.push_back(Expect("replay/immediate", "ReplayDetected",
                       Observed(ua.Deliver(honest.delivered_to, honest.delivered_fields, honest.sp_cookie))));

  // Same token and blind against a brand-new pending request.
  const http::Client client(dep.resolver());
  const std::string fresh = FreshSpSession(client, dep.LoginUrl());
  out.push_back(Expect("replay/cross-pending", "NonceBindingMismatch",
                       Observed(ua.Deliver(honest.delivered_to, honest.delivered_fields, fresh))));

  // Re-randomized blind: the token's aud no longer matches.
  url::Params rerandomized = honest.delivered_fields;
  rerandomized[std::string(oidc::param::kBlind)] = EncodeScalarB64<G>(RandomScalar<G>());
  const std::string fresh2 = FreshSpSession(client, dep.LoginUrl());
  out.push_back(Expect("replay/rerandomized-blind", "BlindMismatch",
                       Observed(ua.Deliver(honest.delivered_to, rerandomized, fresh2))));
  return out;
}

template <PrimeOrderGroup G>
std::vector<ScenarioReport> RunMitmAttack() {
  std::vector<ScenarioReport> out;
  auto run_relay = [](const std::string& relay_origin, agent::FlowResult& result) {
    Deployment<G> dep;
    auto& relay = dep.AddServer();
    InstallRelay(relay.server(), relay_origin, dep.sp_port(), url::Url::Parse(std::string(kGenuineOrigin)).host);
    dep.Publish(relay_origin, relay.Start());
    auto ua = dep.NewAgent();
    result = ua.RunFlow(relay_origin + "/auth", "alice");
  };

  // Sibling origin under the same registrable domain: the audience check
  // passes, the origin inside the nonce binding does not.
  agent::FlowResult attacked;
  run_relay("https://evil.example.com", attacked);
  out.push_back(Expect("mitm/same-audience", "NonceBindingMismatch", Observed(attacked)));

  // Degenerate relay on the genuine origin: no attack, must succeed.
  agent::FlowResult control;
  run_relay(std::string(kGenuineOrigin), control);
  out.push_back(Expect("mitm/control-genuine-origin", "success", Observed(control)));

  // Relay on an unrelated domain asking for example.com: no rewrite.
  agent::FlowResult foreign;
  run_relay("https://login.unrelated.com", foreign);
  out.push_back(Expect("mitm/unauthorized-audience", "audience-refused",
                       std::string(agent::ToString(foreign.rewrite))));
  out.push_back(Expect("mitm/unauthorized-audience-no-session", "no-session",
                       foreign.ok() ? "session" : "no-session"));
  return out;
}

template <PrimeOrderGroup G>
ScenarioReport RunForgedBlind() {
  Deployment<G> dep;
  typename agent::Agent<G>::Options opts;
  opts.before_deliver = [](agent::Forward& fwd) {
    const auto real = DecodeScalarB64<G>(fwd.fields.at(std::string(oidc::param::kBlind)));
    auto forged = RandomScalar<G>();
    while (forged == real) forged = RandomScalar<G>();
    fwd.fields[std::string(oidc::param::kBlind)] = EncodeScalarB64<G>(forged);
    return true;
  };
  auto ua = dep.NewAgent(opts);
  return Expect("forged-blind", "BlindMismatch", Observed(ua.RunFlow(dep.LoginUrl(), "alice")));
}

template <PrimeOrderGroup G>
ScenarioReport RunSuspendedAccount() {
  Deployment<G> dep;
  dep.identity_provider().SetSuspended("alice", true);
  auto ua = dep.NewAgent();
  return Expect("suspended-account", "SuspendedAccount", Observed(ua.RunFlow(dep.LoginUrl(), "alice")));
}

// N concurrent redemptions of one captured delivery; exactly one may win.
template <PrimeOrderGroup G>
ScenarioReport RunRedemptionRace(int n = 16) {
  Deployment<G> dep;
  typename agent::Agent<G>::Options opts;
  opts.before_deliver = [](agent::Forward&) { return false; };
  auto ua = dep.NewAgent(opts);
  const auto captured = ua.RunFlow(dep.LoginUrl(), "alice");

  std::vector<std::future<agent::FlowResult>> attempts;
  for (int i = 0; i < n; ++i) {
    attempts.push_back(std::async(std::launch::async, [&] {
      return ua.Deliver(captured.delivered_to, captured.delivered_fields, captured.sp_cookie);
    }));
  }
  int successes = 0;
  int replays = 0;
  std::string other;
  for (auto& f : attempts) {
    const auto r = f.get();
    if (r.ok()) {
      ++successes;
    } else if (r.error == ErrorCode::kReplayDetected) {
      ++replays;
    } else {
      other += ", " + Observed(r) + " (" + r.error_detail + ")";
    }
  }
  return Expect("redemption-race/" + std::to_string(n),
                "1 success, " + std::to_string(n - 1) + " ReplayDetected",
                std::to_string(successes) + " success, " + std::to_string(replays) + " ReplayDetected" + other);
}

struct SybilReport {
  int flows = 0;
  std::size_t distinct_pseudonyms = 0;
  std::vector<ScenarioReport> checks;
};

// One account, one audience, `n` flows with blinds picked by the user.
template <PrimeOrderGroup G>
SybilReport RunSybilAttempt(int n = 20) {
  SybilReport rep;
  Deployment<G> dep;
  std::set<std::string> pseudonyms;
  int counter = 0;
  typename agent::Agent<G>::Options opts;
  opts.blind_chooser = [&counter]() -> std::optional<typename G::Scalar> {
    const std::string label = "adversarial-blind-" + std::to_string(counter++);
    return G::HashToScalar(AsBytes(label));
  };
  for (int i = 0; i < n; ++i) {
    auto ua = dep.NewAgent(opts);
    const auto r = ua.RunFlow(dep.LoginUrl(), "alice");
    ++rep.flows;
    if (r.ok()) pseudonyms.insert(r.session->pseudonym);
  }
  rep.distinct_pseudonyms = pseudonyms.size();
  rep.checks.push_back(Expect("sybil/distinct-pseudonyms", "1", std::to_string(pseudonyms.size())));
  rep.checks.push_back(RunForgedBlind<G>());

  dep.identity_provider().SetSuspended("alice", true);
  auto ua = dep.NewAgent(opts);
  rep.checks.push_back(Expect("sybil/suspended-mid-sequence", "SuspendedAccount",
                              Observed(ua.RunFlow(dep.LoginUrl(), "alice"))));
  return rep;
}

// ---------------------------------------------------------------------------
// Uniformity of the blinded audience

// 0.999 quantile of chi-square with 9 degrees of freedom.
inline constexpr double kChiSquare999Dof9 = 27.877164871256568;

inline double ChiSquareUniform(const std::map<std::uint32_t, std::uint64_t>& histogram,
                               std::size_t categories) {
  std::uint64_t total = 0;
  for (const auto& [_, c] : histogram) total += c;
  const double expected = static_cast<double>(total) / static_cast<double>(categories);
  double stat = 0;
  std::size_t seen = 0;
  for (const auto& [_, c] : histogram) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
    ++seen;
  }
  stat += static_cast<double>(categories - seen) * expected;  // empty bins
  return stat;
}

struct UniformityReport {
  std::vector<std::string> audiences;
  // Per audience: residue -> count.
  std::vector<std::map<std::uint32_t, std::uint64_t>> exhaustive;
  std::vector<std::map<std::uint32_t, std::uint64_t>> randomized;
  std::vector<double> chi_square;
  bool exhaustive_flat = false;
  bool chi_square_pass = false;
};

// Histograms of the element the agent transmits (r . H(audience)) for two
// audiences on the test group: once over every r, once over `trials`
// seeded-uniform draws.
inline UniformityReport RunUniformityTest(std::uint64_t trials, std::uint64_t seed = 20240501,
                                          std::vector<std::string> audiences = {"example.com", "other.com"}) {
  using G = TestGroup;
  UniformityReport rep;
  rep.audiences = audiences;
  rep.exhaustive_flat = true;
  rep.chi_square_pass = true;
  SeededEntropy entropy(seed);
  for (const auto& a : audiences) {
    const auto aud = core::AudienceId<G>::Derive(a);
    std::map<std::uint32_t, std::uint64_t> ex;
    for (const auto& r : G::AllScalars()) ++ex[core::BlindAudience<G>(aud, r).residue()];
    bool flat = ex.size() == G::kOrder - 1;
    for (const auto& [_, c] : ex) flat = flat && c == 1;
    rep.exhaustive_flat = rep.exhaustive_flat && flat;
    rep.exhaustive.push_back(std::move(ex));

    std::map<std::uint32_t, std::uint64_t> rnd;
    for (std::uint64_t t = 0; t < trials; ++t) {
      ++rnd[core::BlindAudience<G>(aud, RandomScalar<G>(entropy)).residue()];
    }
    const double stat = ChiSquareUniform(rnd, G::kOrder - 1);
    rep.chi_square.push_back(stat);
    rep.chi_square_pass = rep.chi_square_pass && stat < kChiSquare999Dof9;
    rep.randomized.push_back(std::move(rnd));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Benchmark

struct BenchReport {
  std::string backend;
  double mean_derivation_micros = 0;
  std::uint64_t scalar_mults = 0;  // totals over all iterations
  std::uint64_t hash_evals = 0;
  std::uint64_t iterations = 0;
  std::size_t distinct_pseudonyms = 0;

  nlohmann::json ToJson() const {
    return {{"backend", backend},
            {"mean_derivation_micros", mean_derivation_micros},
            {"scalar_mults", scalar_mults},
            {"hash_evals", hash_evals},
            {"iterations", iterations},
            {"scalar_mults_per_iteration", iterations ? scalar_mults / iterations : 0},
            {"hash_evals_per_iteration", iterations ? hash_evals / iterations : 0},
            {"distinct_pseudonyms", distinct_pseudonyms}};
  }
};

// One full derivation as the three parties perform it, minus transport and
// token signatures:
//   agent: r <- Z*, AudienceId = H(aud), A = Blind, nonce binding
//   IdP:   B = BlindEval(A, userId)
//   SP:    AudienceId = H(aud), check A = Blind, nonce binding, Unblind
// 4 scalar multiplications and 4 hash evaluations.
template <PrimeOrderGroup G>
core::Pseudonym<G> FullDerivation(std::string_view audience, std::string_view origin, std::string_view sp_nonce,
                                  const typename G::Scalar& user_id, const typename G::Scalar& r) {
  const auto agent_aud = core::AudienceId<G>::Derive(audience);
  const auto a = core::BlindAudience<G>(agent_aud, r);
  const std::string sent_nonce = oidc::NonceBinding(origin, sp_nonce);

  const auto b = core::BlindEval<G>(a, user_id);

  const auto sp_aud = core::AudienceId<G>::Derive(audience);
  if (!core::VerifyBlind<G>(sp_aud, r, a)) throw Error(ErrorCode::kBlindMismatch, "benchmark: blind check");
  if (sent_nonce != oidc::NonceBinding(origin, sp_nonce)) {
    throw Error(ErrorCode::kNonceBindingMismatch, "benchmark: nonce check");
  }
  return core::Unblind<G>(b, r);
}

template <PrimeOrderGroup G>
BenchReport RunBenchmark(std::uint64_t iterations, std::uint64_t seed = 7) {
  BenchReport rep;
  rep.backend = G::Descriptor().name;
  rep.iterations = iterations;
  const auto user_id = G::HashToScalar(AsBytes("benchmark-user-seed"));
  SeededEntropy entropy(seed);
  std::set<std::string> pseudonyms;
  std::chrono::nanoseconds elapsed{0};
  for (std::uint64_t i = 0; i < iterations; ++i) {
    OpCounter counter;
    std::optional<core::Pseudonym<G>> p;
    {
      CountingScope scope(counter);
      const auto start = std::chrono::steady_clock::now();
      const auto r = RandomScalar<G>(entropy);
      p = FullDerivation<G>(kSharedAudience, kGenuineOrigin, "benchmark-nonce", user_id, r);
      elapsed += std::chrono::steady_clock::now() - start;
    }
    rep.scalar_mults += counter.scalar_mults;
    rep.hash_evals += counter.hash_evals;
    pseudonyms.insert(p->Encoded());
  }
  rep.distinct_pseudonyms = pseudonyms.size();
  rep.mean_derivation_micros =
      iterations ? std::chrono::duration<double, std::micro>(elapsed).count() / static_cast<double>(iterations) : 0;
  return rep;
}

// User-side check: the (A, B) pair in an issued token together with the
// blind reproduces the pseudonym the SP displayed.
template <PrimeOrderGroup G>
bool SelfCheck(std::string_view audience, const token::IdTokenClaims& claims, const typename G::Scalar& r,
               std::string_view displayed_pseudonym) {
  const auto aud = core::AudienceId<G>::Derive(audience);
  const auto a = DecodeElementB64<G>(claims.aud);
  if (!core::VerifyBlind<G>(aud, r, a)) return false;
  return core::Unblind<G>(DecodeElementB64<G>(claims.sub), r).Encoded() == displayed_pseudonym;
}

}  // namespace bison::harness
