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


#include <gtest/gtest.h>

#include <filesystem>

#include "bison/idp.hpp"
#include "bison/ristretto255.hpp"
#include "bison/test_group.hpp"

namespace bison::idp {
namespace {

using TG = TestGroup;
using R = Ristretto255;

constexpr std::string_view kIssuer = "https://idp.example";
constexpr std::string_view kClient = "https://login.example.com";
constexpr std::string_view kRedirect = "https://login.example.com/return";

// A seed whose test-group userId is `k`, found by search.
UserRecord UserWithTestGroupId(std::string label, std::uint32_t k) {
  UserRecord u;
  u.account_label = std::move(label);
  for (int i = 0; i < 256; ++i) {
    u.seed.fill(static_cast<std::uint8_t>(i));
    if (TG::HashToScalar(u.seed).value() == k) return u;
  }
  throw std::runtime_error("no seed found");
}

IdpConfig Config() {
  IdpConfig c;
  c.issuer = std::string(kIssuer);
  c.registered_clients[std::string(kClient)] = {std::string(kRedirect)};
  c.clock = [] { return std::int64_t{1'700'000'000}; };
  return c;
}

token::SigningKey Key() {
  std::array<std::uint8_t, 32> seed{};
  seed.fill(3);
  return token::SigningKey::FromSeed(seed);
}

oidc::AuthorizationRequest BisonRequest(const std::string& client_id) {
  oidc::AuthorizationRequest r;
  r.endpoint = std::string(kIssuer) + "/login";
  r.client_id = client_id;
  r.redirect_uri = std::string(oidc::kAnonymousRedirect);
  r.nonce = "bound";
  r.pairwise_subject_type = std::string(oidc::kBisonMethod);
  return r;
}

oidc::AuthorizationRequest PlainRequest() {
  oidc::AuthorizationRequest r;
  r.endpoint = std::string(kIssuer) + "/login";
  r.client_id = std::string(kClient);
  r.redirect_uri = std::string(kRedirect);
  r.nonce = "plain-nonce";
  return r;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kTransport;
}

TEST(IdpTest, DiscoveryAdvertisesBisonAndKey) {
  IdentityProvider<R> idp(Config(), DefaultUsers(), Key());
  const auto json = idp.Discovery().ToJson();
  EXPECT_EQ(json.at("issuer"), kIssuer);
  EXPECT_EQ(json.at("authorization_endpoint"), "https://idp.example/login");
  const auto types = json.at("pairwise_subject_types").get<std::vector<std::string>>();
  EXPECT_NE(std::find(types.begin(), types.end(), "bison"), types.end());
  EXPECT_EQ(oidc::DiscoveryDocument::FromJson(json).VerificationKey().bytes(), Key().Public().bytes());
}

TEST(IdpTest, TestGroupBlindEvalExample) {
  const auto user = UserWithTestGroupId("alice", 2);
  IdentityProvider<TG> idp(Config(), {user}, Key());
  ASSERT_EQ(idp.UserId("alice").value(), 2u);
  const std::string a = EncodeElementB64<TG>(TG::ElementFromResidue(18));
  const auto resp = idp.HandleAuthorization(BisonRequest(a), "alice");
  const auto claims = token::VerifyToken<TG>(resp.compact_token, Key().Public(), 1'700'000'000, kIssuer);
  EXPECT_EQ(DecodeElementB64<TG>(claims.aud).residue(), 18u);
  EXPECT_EQ(DecodeElementB64<TG>(claims.sub).residue(), 2u);  // 18^2 mod 23
  EXPECT_TRUE(claims.IsBison());
  EXPECT_EQ(claims.nonce, "bound");
  EXPECT_EQ(resp.form.action, oidc::kAnonymousRedirect);
  EXPECT_EQ(resp.form.fields.at("id_token"), resp.compact_token);
}

TEST(IdpTest, TokenLifetime) {
  IdentityProvider<R> idp(Config(), DefaultUsers(), Key());
  const auto a = EncodeElementB64<R>(HashToGroup<R>("example.com"));
  const auto resp = idp.HandleAuthorization(BisonRequest(a), "alice");
  EXPECT_EQ(resp.token.claims.exp - resp.token.claims.iat, token::kDefaultLifetimeSeconds);
}

TEST(IdpTest, SuspendedAccountRefused) {
  IdentityProvider<R> idp(Config(), DefaultUsers(), Key());
  idp.SetSuspended("bob", true);
  const auto a = EncodeElementB64<R>(HashToGroup<R>("example.com"));
  EXPECT_EQ(CodeOf([&] { idp.HandleAuthorization(BisonRequest(a), "bob"); }), ErrorCode::kSuspendedAccount);
  EXPECT_EQ(CodeOf([&] { idp.HandleAuthorization(PlainRequest(), "bob"); }), ErrorCode::kSuspendedAccount);
  EXPECT_NO_THROW(idp.HandleAuthorization(BisonRequest(a), "alice"));
  idp.SetSuspended("bob", false);
  EXPECT_NO_THROW(idp.HandleAuthorization(BisonRequest(a), "bob"));
}

TEST(IdpTest, MalformedBlindedAudience) {
  IdentityProvider<R> idp(Config(), DefaultUsers(), Key());
  for (const std::string& bad : {std::string("https://login.example.com"), Base64UrlEncode(Bytes(32, 0)),
                                Base64UrlEncode(Bytes(31, 1)), std::string("***")}) {
    EXPECT_EQ(CodeOf([&] { idp.HandleAuthorization(BisonRequest(bad), "alice"); }),
              ErrorCode::kMalformedBlindedAudience)
        << bad;
  }
}

TEST(IdpTest, UnknownAccount) {
  IdentityProvider<R> idp(Config(), DefaultUsers(), Key());
  EXPECT_EQ(CodeOf([&] { idp.HandleAuthorization(PlainRequest(), "mallory"); }), ErrorCode::kUnknownAccount);
}

TEST(IdpTest, InvalidRequests) {
  IdentityProvider<R> idp(Config(), DefaultUsers(), Key());
  auto r = PlainRequest();
  r.scope = "profile";
  EXPECT_EQ(CodeOf([&] { idp.HandleAuthorization(r, "alice"); }), ErrorCode::kInvalidRequest);
  r = PlainRequest();
  r.nonce.clear();
  EXPECT_EQ(CodeOf([&] { idp.HandleAuthorization(r, "alice"); }), ErrorCode::kInvalidRequest);
  r = PlainRequest();
  r.response_type = "code";
  EXPECT_EQ(CodeOf([&] { idp.HandleAuthorization(r, "alice"); }), ErrorCode::kInvalidRequest);
  r = PlainRequest();
  r.redirect_uri = "https://evil.example/return";
  EXPECT_EQ(CodeOf([&] { idp.HandleAuthorization(r, "alice"); }), ErrorCode::kInvalidRequest);
}

TEST(IdpTest, PlainOidcIssuesPpid) {
  const auto users = DefaultUsers();
  IdentityProvider<R> idp(Config(), users, Key());
  const auto resp = idp.HandleAuthorization(PlainRequest(), "alice");
  EXPECT_FALSE(resp.token.claims.IsBison());
  EXPECT_EQ(resp.token.claims.aud, kClient);
  EXPECT_EQ(resp.token.claims.sub, oidc::Ppid(kClient, users[0].seed));
  EXPECT_EQ(resp.form.action, kRedirect);
  // Deterministic across IdP instances sharing the user database.
  IdentityProvider<R> again(Config(), users, token::SigningKey::Generate());
  EXPECT_EQ(again.HandleAuthorization(PlainRequest(), "alice").token.claims.sub, resp.token.claims.sub);
}

TEST(IdpTest, DeterministicEvaluation) {
  const auto users = DefaultUsers();
  IdentityProvider<R> idp1(Config(), users, Key());
  IdentityProvider<R> idp2(Config(), users, token::SigningKey::Generate());
  EXPECT_EQ(idp1.UserId("carol"), idp2.UserId("carol"));
  EXPECT_NE(idp1.UserId("alice"), idp1.UserId("bob"));
  const auto a = EncodeElementB64<R>(HashToGroup<R>("x"));
  EXPECT_EQ(idp1.HandleAuthorization(BisonRequest(a), "carol").token.claims.sub,
            idp2.HandleAuthorization(BisonRequest(a), "carol").token.claims.sub);
}

TEST(IdpTest, UserFileRoundTrip) {
  const auto users = DefaultUsers();
  const auto path = std::filesystem::temp_directory_path() / "bison_idp_users.json";
  SaveUsers(path.string(), users);
  const auto back = LoadUsers(path.string());
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), users.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    EXPECT_EQ(back[i].account_label, users[i].account_label);
    EXPECT_EQ(back[i].seed, users[i].seed);
  }
  EXPECT_THROW(UsersFromJson({{"users", {{{"account_label", "x"}, {"seed", "AAAA"}}}}}), Error);
}

}  // namespace
}  // namespace bison::idp
