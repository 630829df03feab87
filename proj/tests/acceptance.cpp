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


// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails. Thresholds are fixed here and not tunable from outside.

#include <sodium.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bison/bison.hpp"

namespace {

using namespace bison;
using R = Ristretto255;
using TG = TestGroup;
using Clock = std::chrono::steady_clock;

constexpr double kCorrectnessBudgetSeconds = 5.0;
constexpr double kFlowBudgetSeconds = 30.0;
constexpr double kMaxMeanDerivationMillis = 10.0;
constexpr std::uint64_t kBenchIterations = 10000;
constexpr std::uint64_t kUniformityTrials = 100000;
constexpr int kStabilityFlows = 20;
constexpr int kRaceSize = 16;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Verdict OprfCorrectness() {
  const auto start = Clock::now();
  int cases = 0;
  int failures = 0;
  for (const auto& x : TG::AllElements()) {
    const core::AudienceId<TG> aud{x, ""};
    for (const auto& r : TG::AllScalars()) {
      for (const auto& k : TG::AllScalars()) {
        ++cases;
        const auto p = core::Unblind<TG>(core::BlindEval<TG>(core::BlindAudience<TG>(aud, r), k), r);
        if (p.element != TG::Mult(k, x)) ++failures;
      }
    }
  }
  int curve_trials = 0;
  int curve_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    ++curve_trials;
    const auto x = HashToGroup<R>("acceptance-audience-" + std::to_string(i));
    const auto k = RandomScalar<R>();
    const auto r = RandomScalar<R>();
    const auto p = core::Unblind<R>(core::BlindEval<R>(R::Mult(r, x), k), r);
    if (!(p.element == R::Mult(k, x))) ++curve_failures;
  }
  const double elapsed = Seconds(start);
  std::ostringstream d;
  d << "test group " << cases << " cases, " << failures << " failures; curve " << curve_trials << " trials, "
    << curve_failures << " failures; " << elapsed << " s (limit " << kCorrectnessBudgetSeconds << " s)";
  return {cases == 1000 && failures == 0 && curve_trials == 1000 && curve_failures == 0 &&
              elapsed < kCorrectnessBudgetSeconds,
          d.str()};
}

Verdict BlindSoundness() {
  long checks = 0;
  long false_accepts = 0;
  long false_rejects = 0;
  for (const auto& x : TG::AllElements()) {
    const core::AudienceId<TG> aud{x, ""};
    for (const auto& r : TG::AllScalars()) {
      const auto a = core::BlindAudience<TG>(aud, r);
      for (const auto& claimed : TG::AllScalars()) {
        ++checks;
        const bool accepted = core::VerifyBlind<TG>(aud, claimed, a);
        if (accepted && claimed != r) ++false_accepts;
        if (!accepted && claimed == r) ++false_rejects;
      }
    }
  }
  std::ostringstream d;
  d << checks << " checks, " << false_accepts << " false accepts, " << false_rejects << " false rejects";
  return {checks == 1000 && false_accepts == 0 && false_rejects == 0, d.str()};
}

Verdict BlindUniformity() {
  const auto rep = harness::RunUniformityTest(kUniformityTrials);
  std::ostringstream d;
  d << "audiences";
  for (const auto& a : rep.audiences) d << " " << a;
  d << "; exhaustive histograms " << (rep.exhaustive_flat ? "flat" : "NOT flat") << "; chi-square over "
    << kUniformityTrials << " draws:";
  for (double c : rep.chi_square) d << " " << c;
  d << " (critical " << harness::kChiSquare999Dof9 << " at alpha 0.001, 9 dof)";
  const bool distinct_audiences =
      HashToGroup<TG>(rep.audiences.at(0)) != HashToGroup<TG>(rep.audiences.at(1));
  return {rep.exhaustive_flat && rep.chi_square_pass && distinct_audiences, d.str()};
}

template <PrimeOrderGroup G>
OpCounter CountOneDerivation() {
  const auto user_id = G::HashToScalar(AsBytes("acceptance-user"));
  const auto r = RandomScalar<G>();
  OpCounter counter;
  {
    CountingScope scope(counter);
    (void)harness::FullDerivation<G>(harness::kSharedAudience, harness::kGenuineOrigin, "acceptance-nonce", user_id, r);
  }
  return counter;
}

Verdict OperationCount() {
  const OpCounter curve = CountOneDerivation<R>();
  const OpCounter small = CountOneDerivation<TG>();
  std::ostringstream d;
  d << "ristretto255: " << curve.scalar_mults << " scalar mults, " << curve.hash_evals << " hashes; test group: "
    << small.scalar_mults << " scalar mults, " << small.hash_evals << " hashes (expected 4 and 4)";
  return {curve.scalar_mults == 4 && curve.hash_evals == 4 && small.scalar_mults == 4 && small.hash_evals == 4,
          d.str()};
}

Verdict Performance() {
  const auto rep = harness::RunBenchmark<R>(kBenchIterations);
  const double mean_ms = rep.mean_derivation_micros / 1000.0;
  std::ostringstream d;
  d << "mean " << mean_ms << " ms over " << rep.iterations << " iterations on " << rep.backend << " (limit "
    << kMaxMeanDerivationMillis << " ms); " << rep.distinct_pseudonyms << " distinct pseudonym(s)";
  return {rep.iterations >= 10000 && mean_ms <= kMaxMeanDerivationMillis && rep.distinct_pseudonyms == 1, d.str()};
}

Verdict EndToEndStability() {
  const auto start = Clock::now();
  harness::DeploymentOptions opts;
  opts.service_providers = {sp::SpConfig{"https://login.example.com", "example.com"},
                            sp::SpConfig{"https://shop.other.com", "other.com"}};
  harness::Deployment<R> dep(opts);
  auto ua = dep.NewAgent();

  std::set<std::string> pseudonyms;
  std::set<std::string> blinds;
  int failed = 0;
  for (int i = 0; i < kStabilityFlows; ++i) {
    const auto r = ua.RunFlow(dep.LoginUrl(0), "alice");
    if (!r.ok()) {
      ++failed;
      continue;
    }
    pseudonyms.insert(r.session->pseudonym);
    blinds.insert(r.delivered_fields.at(std::string(oidc::param::kBlind)));
  }
  const auto other_audience = ua.RunFlow(dep.LoginUrl(1), "alice");
  const auto other_account = ua.RunFlow(dep.LoginUrl(0), "bob");
  const bool audiences_differ = other_audience.ok() && !pseudonyms.empty() &&
                                !pseudonyms.contains(other_audience.session->pseudonym);
  const bool accounts_differ = other_account.ok() && !pseudonyms.empty() &&
                               !pseudonyms.contains(other_account.session->pseudonym);
  const double elapsed = Seconds(start);
  std::ostringstream d;
  d << kStabilityFlows << " flows, " << failed << " failed, " << blinds.size() << " distinct blinds, "
    << pseudonyms.size() << " distinct pseudonym(s); other audience "
    << (audiences_differ ? "distinct" : "NOT distinct") << "; other account "
    << (accounts_differ ? "distinct" : "NOT distinct") << "; " << elapsed << " s (limit " << kFlowBudgetSeconds
    << " s)";
  return {failed == 0 && pseudonyms.size() == 1 && blinds.size() == static_cast<std::size_t>(kStabilityFlows) &&
              audiences_differ && accounts_differ && elapsed < kFlowBudgetSeconds,
          d.str()};
}

Verdict AttackSuite() {
  std::vector<harness::ScenarioReport> reports;
  for (auto& r : harness::RunReplayAttack<R>()) reports.push_back(r);
  for (auto& r : harness::RunMitmAttack<R>()) reports.push_back(r);
  reports.push_back(harness::RunForgedBlind<R>());
  reports.push_back(harness::RunSuspendedAccount<R>());
  reports.push_back(harness::RunRedemptionRace<R>(kRaceSize));

  // Every scenario named by the criterion must be present and exact.
  const std::vector<std::pair<std::string, std::string>> required = {
      {"replay/immediate", "ReplayDetected"},
      {"replay/cross-pending", "NonceBindingMismatch"},
      {"mitm/same-audience", "NonceBindingMismatch"},
      {"forged-blind", "BlindMismatch"},
      {"suspended-account", "SuspendedAccount"},
      {"redemption-race/16", "1 success, 15 ReplayDetected"},
  };
  bool pass = true;
  std::ostringstream d;
  for (const auto& [name, expected] : required) {
    bool found = false;
    for (const auto& r : reports) {
      if (r.name == name) found = found || (r.passed && r.expected == expected);
    }
    pass = pass && found;
  }
  int passed = 0;
  for (const auto& r : reports) {
    if (r.passed) {
      ++passed;
    } else {
      pass = false;
      d << "[" << r.name << ": expected " << r.expected << ", observed " << r.observed << "] ";
    }
  }
  d << passed << "/" << reports.size() << " scenario checks exact";
  return {pass, d.str()};
}

// Independent PPID computation straight from libsodium.
std::string ReferencePpid(const std::string& client_id, const std::array<std::uint8_t, 32>& seed) {
  std::vector<unsigned char> msg(client_id.begin(), client_id.end());
  msg.insert(msg.end(), seed.begin(), seed.end());
  unsigned char digest[crypto_hash_sha512_BYTES];
  crypto_hash_sha512(digest, msg.data(), msg.size());
  char out[sodium_base64_ENCODED_LEN(crypto_hash_sha512_BYTES, sodium_base64_VARIANT_URLSAFE_NO_PADDING)];
  sodium_bin2base64(out, sizeof out, digest, sizeof digest, sodium_base64_VARIANT_URLSAFE_NO_PADDING);
  return out;
}

Verdict BackwardsCompatibility() {
  harness::DeploymentOptions opts;
  sp::SpConfig plain{"https://login.example.com", ""};
  plain.bison_opt_in = false;
  opts.service_providers = {plain};
  const auto users = opts.users;
  const std::string expected = ReferencePpid("https://login.example.com", users.at(0).seed);

  std::vector<std::string> observed;
  bool all_plain = true;
  for (int run = 0; run < 2; ++run) {
    harness::Deployment<R> dep(opts);  // fresh IdP, SP and signing key each run
    auto ua = dep.NewAgent();
    for (int i = 0; i < 2; ++i) {
      const auto r = ua.RunFlow(dep.LoginUrl(), users.at(0).account_label);
      if (!r.ok() || r.rewrite != agent::RewriteOutcome::kNotBisonRequest ||
          r.session->derivation_mode != sp::DerivationMode::kPpidFallback) {
        all_plain = false;
        continue;
      }
      observed.push_back(r.session->pseudonym);
    }
  }
  bool match = observed.size() == 4;
  for (const auto& p : observed) match = match && p == expected;
  std::ostringstream d;
  d << observed.size() << "/4 plain OIDC flows completed; "
    << (match ? "all equal" : "NOT all equal") << " to base64url(SHA-512(client_id || seed)) = "
    << expected.substr(0, 16) << "...";
  return {all_plain && match, d.str()};
}

Verdict Statelessness() {
  harness::Deployment<R> dep;
  std::string first;
  {
    auto ua = dep.NewAgent();
    const auto r = ua.RunFlow(dep.LoginUrl(), "carol");
    if (!r.ok()) return {false, "first flow failed: " + r.error_detail};
    first = r.session->pseudonym;
  }
  auto fresh = dep.NewAgent();
  const std::size_t carried = fresh.InFlightCount();
  const auto r = fresh.RunFlow(dep.LoginUrl(), "carol");
  if (!r.ok()) return {false, "returning flow failed: " + r.error_detail};
  const bool same = r.session->pseudonym == first;
  std::ostringstream d;
  d << "fresh agent carried " << carried << " record(s); returning pseudonym "
    << (same ? "identical" : "DIFFERENT") << "; " << fresh.InFlightCount() << " record(s) left after flow";
  return {carried == 0 && same && fresh.InFlightCount() == 0, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"oprf-correctness", OprfCorrectness},
      {"blind-soundness", BlindSoundness},
      {"blind-uniformity", BlindUniformity},
      {"operation-count", OperationCount},
      {"performance", Performance},
      {"end-to-end-stability", EndToEndStability},
      {"attack-suite", AttackSuite},
      {"backwards-compatibility", BackwardsCompatibility},
      {"statelessness", Statelessness},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("%s  %-24s %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
