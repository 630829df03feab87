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


// Command-line front end: run the loopback demo, single headless flows, the
// attack scenarios, the benchmark, the user-side self-check, and emit shared
// test vectors for other agent implementations.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <string>

#include "bison/bison.hpp"

namespace {

using namespace bison;
using json = nlohmann::json;

bool g_json = false;

void Emit(const json& j, const std::string& human) {
  if (g_json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << human;
  }
}

std::string DefaultOriginFor(const std::string& audience) {
  if (audience.find("://") != std::string::npos) return audience;
  return "https://login." + audience;
}

harness::DeploymentOptions MakeOptions(const std::string& audience, const std::string& origin, bool bison_opt_in,
                                       bool sp_samples_blind, const std::string& users_file) {
  harness::DeploymentOptions opts;
  sp::SpConfig config;
  config.origin = origin.empty() ? DefaultOriginFor(audience) : origin;
  config.audience = audience;
  config.bison_opt_in = bison_opt_in;
  config.sp_samples_blind = sp_samples_blind;
  opts.service_providers = {config};
  if (!users_file.empty()) opts.users = idp::LoadUsers(users_file);
  return opts;
}

json FlowJson(const agent::FlowResult& r) {
  json j = {{"rewrite", agent::ToString(r.rewrite)}};
  if (r.ok()) {
    j["session"] = r.session->ToJson();
  } else {
    j["error"] = r.error ? std::string(ToString(*r.error)) : "unknown";
    j["detail"] = r.error_detail;
  }
  return j;
}

template <PrimeOrderGroup G>
int RunFlowCommand(const std::string& account, const std::string& audience, const std::string& origin,
                   bool no_bison, bool sp_samples_blind, const std::string& users_file) {
  harness::Deployment<G> dep(MakeOptions(audience, origin, !no_bison, sp_samples_blind, users_file));
  auto ua = dep.NewAgent();
  const auto r = ua.RunFlow(dep.LoginUrl(), account);
  std::string human;
  if (r.ok()) {
    human = "pseudonym:  " + r.session->pseudonym + "\nderivation: " +
            std::string(sp::ToString(r.session->derivation_mode)) + "\naudience:   " + r.session->audience + "\n";
  } else {
    human = "flow failed: " + r.error_detail + "\n";
  }
  Emit(FlowJson(r), human);
  return r.ok() ? 0 : 1;
}

template <PrimeOrderGroup G>
int RunSelfCheck(const std::string& account, const std::string& audience, const std::string& users_file) {
  harness::Deployment<G> dep(MakeOptions(audience, "", true, false, users_file));
  agent::Forward captured;
  typename agent::Agent<G>::Options opts;
  opts.before_deliver = [&](agent::Forward& fwd) {
    captured = fwd;
    return true;
  };
  auto ua = dep.NewAgent(opts);
  const auto r = ua.RunFlow(dep.LoginUrl(), account);
  if (!r.ok()) {
    Emit(FlowJson(r), "flow failed: " + r.error_detail + "\n");
    return 1;
  }
  const auto claims = token::SignedIdToken::Parse(captured.fields.at("id_token")).claims;
  const auto blind = DecodeScalarB64<G>(captured.fields.at("blind"));
  const bool ok = harness::SelfCheck<G>(audience, claims, blind, r.session->pseudonym);
  Emit({{"pseudonym", r.session->pseudonym}, {"aud", claims.aud}, {"sub", claims.sub}, {"verified", ok}},
       "pseudonym shown by SP: " + r.session->pseudonym + "\nrecomputed from (A, B, r): " +
           (ok ? "match" : "MISMATCH") + "\n");
  return ok ? 0 : 1;
}

template <PrimeOrderGroup G>
int RunBench(std::uint64_t iterations) {
  const auto rep = harness::RunBenchmark<G>(iterations);
  std::string human = "backend:        " + rep.backend + "\niterations:     " + std::to_string(rep.iterations) +
                      "\nmean:           " + std::to_string(rep.mean_derivation_micros) + " us\n" +
                      "mults/iter:     " + std::to_string(rep.scalar_mults / std::max<std::uint64_t>(1, iterations)) +
                      "\nhashes/iter:    " + std::to_string(rep.hash_evals / std::max<std::uint64_t>(1, iterations)) +
                      "\n";
  Emit(rep.ToJson(), human);
  return 0;
}

int RunAttack(const std::string& name) {
  using G = Ristretto255;
  std::vector<harness::ScenarioReport> reports;
  auto add = [&](std::vector<harness::ScenarioReport> r) { reports.insert(reports.end(), r.begin(), r.end()); };
  const bool all = name == "all";
  if (all || name == "replay") add(harness::RunReplayAttack<G>());
  if (all || name == "mitm") add(harness::RunMitmAttack<G>());
  if (all || name == "forged-blind") reports.push_back(harness::RunForgedBlind<G>());
  if (all || name == "suspended") reports.push_back(harness::RunSuspendedAccount<G>());
  if (all || name == "race") reports.push_back(harness::RunRedemptionRace<G>(16));
  if (all || name == "sybil") add(harness::RunSybilAttempt<G>(20).checks);
  if (reports.empty()) {
    std::cerr << "unknown attack '" << name << "'\n";
    return 2;
  }
  json arr = json::array();
  std::string human;
  bool ok = true;
  for (const auto& r : reports) {
    arr.push_back({{"name", r.name}, {"expected", r.expected}, {"observed", r.observed}, {"passed", r.passed}});
    human += std::string(r.passed ? "PASS " : "FAIL ") + r.name + ": expected " + r.expected + ", observed " +
             r.observed + "\n";
    ok = ok && r.passed;
  }
  Emit(arr, human);
  return ok ? 0 : 1;
}

// Fixtures shared with browser-side agents:
// {audience, origin, nonce, r, expected_client_id, expected_nonce_binding}
int RunVectors(int count, const std::string& out_file) {
  using G = Ristretto255;
  auto resolver = std::make_shared<http::Resolver>();
  json arr = json::array();
  for (int i = 0; i < count; ++i) {
    const std::string host = i % 2 == 0 ? "login.example.com" : "app" + std::to_string(i) + ".example.org";
    const std::string origin = "https://" + host;
    const std::string audience = i % 3 == 0 ? origin : (i % 2 == 0 ? "example.com" : "example.org");
    oidc::AuthorizationRequest req;
    req.endpoint = std::string(harness::kIdpIssuer) + "/login";
    req.client_id = origin;
    req.redirect_uri = origin + "/return";
    req.nonce = "nonce-" + std::to_string(i);
    req.pairwise_subject_types = {"bison"};
    if (audience != origin) req.audience_id = audience;
    const auto r = G::HashToScalar(AsBytes("vector-blind-" + std::to_string(i)));
    agent::Agent<G> ua(resolver);
    const auto rw = ua.RewriteRequest(req, agent::OriginContext::FromString(origin), true, r);
    arr.push_back({{"audience", audience},
                   {"origin", origin},
                   {"nonce", req.nonce},
                   {"r", EncodeScalarB64<G>(r)},
                   {"expected_client_id", rw.request.client_id},
                   {"expected_nonce_binding", rw.request.nonce}});
  }
  if (out_file.empty()) {
    std::cout << arr.dump(2) << "\n";
  } else {
    std::ofstream(out_file) << arr.dump(2) << "\n";
  }
  return 0;
}

int RunDemo(int idp_port, int sp_port, const std::string& users_file, bool wait) {
  using G = Ristretto255;
  harness::DeploymentOptions opts;
  opts.idp_issuer = "http://localhost:" + std::to_string(idp_port);
  sp::SpConfig config;
  config.origin = "http://localhost:" + std::to_string(sp_port);
  opts.service_providers = {config};
  opts.ports = {idp_port, sp_port};
  if (!users_file.empty()) {
    opts.users = idp::LoadUsers(users_file);
  }
  harness::Deployment<G> dep(opts);
  auto ua = dep.NewAgent();
  const auto r = ua.RunFlow(dep.LoginUrl(), dep.identity_provider().AccountLabels().front());
  json j = {{"idp", opts.idp_issuer},
            {"sp", config.origin},
            {"discovery", opts.idp_issuer + std::string(oidc::kDiscoveryPath)},
            {"headless_flow", FlowJson(r)}};
  Emit(j, "IdP:        " + opts.idp_issuer + "\nSP:         " + config.origin + "\ndiscovery:  " + opts.idp_issuer +
              std::string(oidc::kDiscoveryPath) + "\nheadless flow as " +
              dep.identity_provider().AccountLabels().front() + ": " +
              (r.ok() ? r.session->pseudonym : r.error_detail) + "\n");
  if (wait) {
    std::cout << "serving; press Enter to stop" << std::endl;
    std::string line;
    std::getline(std::cin, line);
  }
  return r.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scoped pseudonyms for OpenID Connect: loopback demo and test harness"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--json", g_json, "Machine-readable output");

  std::string backend = "curve";
  std::string account = "alice";
  std::string audience = "example.com";
  std::string origin;
  std::string users_file;
  bool no_bison = false;
  bool sp_samples_blind = false;

  auto* demo = app.add_subcommand("demo", "Launch IdP and SP on localhost and run one headless flow");
  int idp_port = 8080;
  int sp_port = 8081;
  bool no_wait = false;
  demo->add_option("--idp-port", idp_port, "IdP listen port")->capture_default_str();
  demo->add_option("--sp-port", sp_port, "SP listen port")->capture_default_str();
  demo->add_option("--users", users_file, "User file (JSON)");
  demo->add_flag("--no-wait", no_wait, "Exit after the headless flow");

  auto* flow = app.add_subcommand("flow", "Run one headless login and print the pseudonym");
  flow->add_option("--account", account, "Account to sign in as")->capture_default_str();
  flow->add_option("--audience", audience, "Audience the SP asks for")->capture_default_str();
  flow->add_option("--origin", origin, "SP origin (default https://login.<audience>)");
  flow->add_option("--users", users_file, "User file (JSON)");
  flow->add_option("--backend", backend, "Group backend")->capture_default_str()->check(CLI::IsMember({"curve", "testgroup"}));
  flow->add_flag("--no-bison", no_bison, "SP does not opt in; plain OIDC with pairwise identifiers");
  flow->add_flag("--sp-samples-blind", sp_samples_blind, "Replay-hardened variant: SP chooses r");

  auto* attack = app.add_subcommand("attack", "Run adversary scenarios");
  std::string attack_name = "all";
  attack->add_option("name", attack_name, "replay|mitm|forged-blind|suspended|race|sybil|all");

  auto* bench = app.add_subcommand("bench", "Benchmark the full derivation");
  std::uint64_t iterations = 10000;
  bench->add_option("--iterations", iterations, "Derivations to time")->capture_default_str();
  bench->add_option("--backend", backend, "Group backend")->capture_default_str()->check(CLI::IsMember({"curve", "testgroup"}));

  auto* selfcheck = app.add_subcommand("selfcheck", "Recompute the SP's pseudonym from the issued token and blind");
  selfcheck->add_option("--account", account, "Account to sign in as")->capture_default_str();
  selfcheck->add_option("--audience", audience, "Audience the SP asks for")->capture_default_str();
  selfcheck->add_option("--users", users_file, "User file (JSON)");

  auto* vectors = app.add_subcommand("vectors", "Emit request-rewrite test vectors");
  int count = 10;
  std::string out_file;
  vectors->add_option("--count", count, "Number of vectors")->capture_default_str();
  vectors->add_option("--out", out_file, "Write to file instead of stdout");

  auto* users = app.add_subcommand("users", "Generate a user file with the three demo accounts");
  users->add_option("--out", out_file, "Destination JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*demo) return RunDemo(idp_port, sp_port, users_file, !no_wait);
    if (*flow) {
      return backend == "curve"
                 ? RunFlowCommand<Ristretto255>(account, audience, origin, no_bison, sp_samples_blind, users_file)
                 : RunFlowCommand<TestGroup>(account, audience, origin, no_bison, sp_samples_blind, users_file);
    }
    if (*attack) return RunAttack(attack_name);
    if (*bench) return backend == "curve" ? RunBench<Ristretto255>(iterations) : RunBench<TestGroup>(iterations);
    if (*selfcheck) return RunSelfCheck<Ristretto255>(account, audience, users_file);
    if (*vectors) return RunVectors(count, out_file);
    if (*users) {
      idp::SaveUsers(out_file, idp::DefaultUsers());
      std::cout << "wrote " << out_file << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
