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

#include <sodium.h>

#include <nlohmann/json.hpp>

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "bison/encoding.hpp"
#include "bison/error.hpp"
#include "bison/group.hpp"

// Compact signed ID tokens: base64url(header) "." base64url(claims) "."
// base64url(signature), signed with Ed25519 over the first two segments.
// Claim sets serialize with sorted keys and no insignificant whitespace, so
// the payload bytes are a function of the claim values alone.
namespace bison::token {

inline constexpr std::int64_t kDefaultLifetimeSeconds = 300;
inline constexpr std::int64_t kClockSkewSeconds = 60;
inline constexpr std::string_view kAlgorithm = "EdDSA";
inline constexpr std::string_view kBisonSubjectType = "bison";

inline std::int64_t UnixNow() {
  using namespace std::chrono;
  return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

struct IdTokenClaims {
  std::string iss;
  std::string aud;
  std::string sub;
  std::string nonce;
  std::int64_t iat = 0;
  std::int64_t exp = 0;
  std::optional<std::string> pairwise_subject_type;

  bool IsBison() const { return pairwise_subject_type == kBisonSubjectType; }

  nlohmann::json ToJson() const {
    nlohmann::json j = {{"iss", iss}, {"aud", aud},  {"sub", sub},
                        {"nonce", nonce}, {"iat", iat}, {"exp", exp}};
    if (pairwise_subject_type) j["pairwise_subject_type"] = *pairwise_subject_type;
    return j;
  }

  static IdTokenClaims FromJson(const nlohmann::json& j) {
    try {
      IdTokenClaims c;
      c.iss = j.at("iss").get<std::string>();
      c.aud = j.at("aud").get<std::string>();
      c.sub = j.at("sub").get<std::string>();
      c.nonce = j.at("nonce").get<std::string>();
      c.iat = j.at("iat").get<std::int64_t>();
      c.exp = j.at("exp").get<std::int64_t>();
      if (j.contains("pairwise_subject_type")) {
        c.pairwise_subject_type = j.at("pairwise_subject_type").get<std::string>();
      }
      return c;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedToken, std::string("claims: ") + e.what());
    }
  }

  friend bool operator==(const IdTokenClaims&, const IdTokenClaims&) = default;
};

// Structural invariants of a claim set. For BISON claims aud and sub must
// both decode to non-identity group elements.
template <PrimeOrderGroup G>
void CheckClaimInvariants(const IdTokenClaims& c) {
  if (c.exp <= c.iat) throw Error(ErrorCode::kMalformedToken, "exp must be after iat");
  if (c.IsBison()) {
    try {
      (void)DecodeElementB64<G>(c.aud);
      (void)DecodeElementB64<G>(c.sub);
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedToken, std::string("bison aud/sub: ") + e.what());
    }
  }
}

class VerificationKey {
 public:
  using PublicBytes = std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES>;

  VerificationKey(const PublicBytes& pk, std::string kid) : pk_(pk), kid_(std::move(kid)) {}

  const PublicBytes& bytes() const { return pk_; }
  const std::string& kid() const { return kid_; }

  nlohmann::json ToJwk() const {
    return {{"kty", "OKP"}, {"crv", "Ed25519"}, {"alg", kAlgorithm},
            {"use", "sig"}, {"kid", kid_},      {"x", Base64UrlEncode(pk_)}};
  }

  static VerificationKey FromJwk(const nlohmann::json& jwk) {
    try {
      if (jwk.at("kty") != "OKP" || jwk.at("crv") != "Ed25519") {
        throw Error(ErrorCode::kMalformedEncoding, "unsupported JWK type");
      }
      const Bytes x = Base64UrlDecode(jwk.at("x").get<std::string>());
      if (x.size() != crypto_sign_PUBLICKEYBYTES) {
        throw Error(ErrorCode::kMalformedEncoding, "Ed25519 key has wrong length");
      }
      PublicBytes pk{};
      std::copy(x.begin(), x.end(), pk.begin());
      return VerificationKey(pk, jwk.value("kid", ""));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedEncoding, std::string("jwk: ") + e.what());
    }
  }

  // First key in a JWK set whose kid matches, or the only key.
  static VerificationKey FromJwks(const nlohmann::json& jwks, std::string_view kid = {}) {
    const auto& keys = jwks.at("keys");
    for (const auto& k : keys) {
      if (kid.empty() || k.value("kid", "") == kid) return FromJwk(k);
    }
    throw Error(ErrorCode::kMalformedEncoding, "no matching key in JWK set");
  }

  friend bool operator==(const VerificationKey&, const VerificationKey&) = default;

 private:
  PublicBytes pk_;
  std::string kid_;
};

class SigningKey {
 public:
  static SigningKey Generate() {
    EnsureSodium();
    std::array<std::uint8_t, crypto_sign_SEEDBYTES> seed{};
    randombytes_buf(seed.data(), seed.size());
    SigningKey k = FromSeed(seed);
    sodium_memzero(seed.data(), seed.size());
    return k;
  }

  static SigningKey FromSeed(std::span<const std::uint8_t, crypto_sign_SEEDBYTES> seed) {
    EnsureSodium();
    SigningKey k;
    crypto_sign_seed_keypair(k.pk_.data(), k.sk_.data(), seed.data());
    // kid: first 8 bytes of SHA-512(pk), enough to tell keys apart in a set.
    const Sha512Digest d = Sha512Raw(k.pk_);
    k.kid_ = Base64UrlEncode(std::span<const std::uint8_t>(d.data(), 8));
    return k;
  }

  ~SigningKey() { sodium_memzero(sk_.data(), sk_.size()); }
  SigningKey(const SigningKey&) = default;
  SigningKey& operator=(const SigningKey&) = default;

  VerificationKey Public() const { return VerificationKey(pk_, kid_); }
  const std::string& kid() const { return kid_; }

  Bytes Sign(std::span<const std::uint8_t> msg) const {
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), sk_.data());
    return sig;
  }

 private:
  SigningKey() = default;

  std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES> pk_{};
  std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk_{};
  std::string kid_;
};

struct SignedIdToken {
  nlohmann::json header;
  IdTokenClaims claims;
  std::string header_segment;
  std::string payload_segment;
  Bytes signature;

  std::string Serialize() const {
    return header_segment + "." + payload_segment + "." + Base64UrlEncode(signature);
  }

  // Splits and decodes a compact token. Does not check the signature.
  static SignedIdToken Parse(std::string_view compact) {
    const auto dot1 = compact.find('.');
    const auto dot2 = dot1 == std::string_view::npos ? dot1 : compact.find('.', dot1 + 1);
    if (dot2 == std::string_view::npos || compact.find('.', dot2 + 1) != std::string_view::npos) {
      throw Error(ErrorCode::kMalformedToken, "expected three segments");
    }
    SignedIdToken t;
    t.header_segment = std::string(compact.substr(0, dot1));
    t.payload_segment = std::string(compact.substr(dot1 + 1, dot2 - dot1 - 1));
    try {
      t.header = nlohmann::json::parse(ToString(Base64UrlDecode(t.header_segment)));
      t.claims = IdTokenClaims::FromJson(
          nlohmann::json::parse(ToString(Base64UrlDecode(t.payload_segment))));
      t.signature = Base64UrlDecode(compact.substr(dot2 + 1));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedToken, e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kMalformedToken) throw;
      throw Error(ErrorCode::kMalformedToken, e.what());
    }
    if (!t.header.is_object()) throw Error(ErrorCode::kMalformedToken, "header is not an object");
    return t;
  }
};

// Canonical payload bytes for a claim set.
inline std::string CanonicalPayload(const IdTokenClaims& claims) { return claims.ToJson().dump(); }

// Signs whatever it is given. Issuers go through IssueToken; this exists so
// tests can mint structurally invalid but correctly signed tokens.
inline SignedIdToken SignUnchecked(const IdTokenClaims& claims, const SigningKey& key) {
  SignedIdToken t;
  t.header = {{"alg", kAlgorithm}, {"kid", key.kid()}, {"typ", "JWT"}};
  t.claims = claims;
  t.header_segment = Base64UrlEncode(AsBytes(t.header.dump()));
  t.payload_segment = Base64UrlEncode(AsBytes(CanonicalPayload(claims)));
  const std::string signing_input = t.header_segment + "." + t.payload_segment;
  t.signature = key.Sign(AsBytes(signing_input));
  return t;
}

template <PrimeOrderGroup G>
SignedIdToken IssueToken(const IdTokenClaims& claims, const SigningKey& key) {
  try {
    CheckClaimInvariants<G>(claims);
  } catch (const Error& e) {
    throw Error(ErrorCode::kIssuanceFailure, e.what());
  }
  return SignUnchecked(claims, key);
}

// Returns the claims iff the signature is valid under `key`, the claim set is
// well formed, the issuer matches and the token is current at `now`.
// Expiry is strict (now >= exp fails); only the iat side tolerates skew.
template <PrimeOrderGroup G>
IdTokenClaims VerifyToken(std::string_view compact, const VerificationKey& key, std::int64_t now,
                          std::string_view expected_issuer) {
  EnsureSodium();
  const SignedIdToken t = SignedIdToken::Parse(compact);
  if (t.header.value("alg", "") != kAlgorithm) {
    throw Error(ErrorCode::kMalformedToken, "unsupported alg");
  }
  if (t.header.contains("kid") && t.header.value("kid", "") != key.kid() && !key.kid().empty()) {
    throw Error(ErrorCode::kBadSignature, "token signed with an unknown key id");
  }
  const std::string signing_input = t.header_segment + "." + t.payload_segment;
  if (t.signature.size() != crypto_sign_BYTES ||
      crypto_sign_verify_detached(t.signature.data(),
                                  reinterpret_cast<const unsigned char*>(signing_input.data()),
                                  signing_input.size(), key.bytes().data()) != 0) {
    throw Error(ErrorCode::kBadSignature, "signature does not verify");
  }
  CheckClaimInvariants<G>(t.claims);
  if (t.claims.iss != expected_issuer) {
    throw Error(ErrorCode::kWrongIssuer, "issuer '" + t.claims.iss + "'");
  }
  if (now >= t.claims.exp) throw Error(ErrorCode::kExpired, "token expired");
  if (t.claims.iat > now + kClockSkewSeconds) {
    throw Error(ErrorCode::kExpired, "token issued in the future");
  }
  return t.claims;
}

}  // namespace bison::token
