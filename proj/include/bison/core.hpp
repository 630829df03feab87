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

#include <string>
#include <string_view>

#include "bison/group.hpp"

// Scoped-pseudonym derivation built from the three Hashed Diffie-Hellman
// OPRF operations:
//
//   Blind(X, r)      = r . X           (user device)
//   BlindEval(A, k)  = k . A           (identity provider, k = userId)
//   Unblind(B, r)    = r^-1 . B        (service provider)
//
// so that Unblind(BlindEval(Blind(X, r), k), r) = k . X regardless of r.
// The service provider additionally recomputes Blind(X, r) to check that the
// r it was handed is the one the identity provider actually saw.
namespace bison::core {

template <PrimeOrderGroup G>
struct AudienceId {
  typename G::Element element;
  std::string source_audience;

  static AudienceId Derive(std::string_view audience) {
    return AudienceId{HashToGroup<G>(audience), std::string(audience)};
  }
};

// Blinding factor for exactly one authentication attempt.
template <PrimeOrderGroup G>
struct Blind {
  typename G::Scalar r;

  template <EntropySource E>
  static Blind Sample(E& entropy) {
    return Blind{RandomScalar<G>(entropy)};
  }
  static Blind Sample() { return Blind{RandomScalar<G>()}; }
};

template <PrimeOrderGroup G>
struct BlindedPair {
  typename G::Element a;  // blinded audience id
  typename G::Element b;  // blinded pseudonym
};

template <PrimeOrderGroup G>
struct Pseudonym {
  typename G::Element element;

  // Canonical text form, as carried in the `sub` claim and shown to users.
  std::string Encoded() const { return EncodeElementB64<G>(element); }

  friend bool operator==(const Pseudonym&, const Pseudonym&) = default;
};

template <PrimeOrderGroup G>
typename G::Element BlindAudience(const AudienceId<G>& aud, const typename G::Scalar& r) {
  return G::Mult(r, aud.element);
}

template <PrimeOrderGroup G>
typename G::Element BlindEval(const typename G::Element& blinded_audience,
                              const typename G::Scalar& user_id) {
  return G::Mult(user_id, blinded_audience);
}

template <PrimeOrderGroup G>
Pseudonym<G> Unblind(const typename G::Element& blinded_pseudonym, const typename G::Scalar& r) {
  return Pseudonym<G>{G::Mult(G::Invert(r), blinded_pseudonym)};
}

// True iff `blinded_audience` is Blind(aud, claimed_r). Since s -> s.X is a
// bijection on the non-zero scalars, acceptance pins claimed_r to the blind
// that produced the value.
template <PrimeOrderGroup G>
bool VerifyBlind(const AudienceId<G>& aud, const typename G::Scalar& claimed_r,
                 const typename G::Element& blinded_audience) {
  return BlindAudience(aud, claimed_r) == blinded_audience;
}

// userId . AudienceId computed directly. Reference for tests and for the
// user-side check that an issued (A, B) pair yields the displayed pseudonym.
template <PrimeOrderGroup G>
Pseudonym<G> DerivePseudonymDirect(const typename G::Scalar& user_id, const AudienceId<G>& aud) {
  return Pseudonym<G>{G::Mult(user_id, aud.element)};
}

}  // namespace bison::core
