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


// Derives a scoped pseudonym with the bare OPRF operations, without any of
// the OpenID Connect machinery.

#include <iostream>

#include "bison/core.hpp"
#include "bison/ristretto255.hpp"

int main() {
  using G = bison::Ristretto255;
  namespace core = bison::core;

  const auto user_id = G::HashToScalar(bison::AsBytes("a 32-byte seed the IdP keeps secret"));
  const auto audience = core::AudienceId<G>::Derive("example.com");

  const auto blind = core::Blind<G>::Sample();                      // user device
  const auto a = core::BlindAudience<G>(audience, blind.r);         // sent to the IdP
  const auto b = core::BlindEval<G>(a, user_id);                    // IdP
  if (!core::VerifyBlind<G>(audience, blind.r, a)) return 1;        // SP
  const auto pseudonym = core::Unblind<G>(b, blind.r);              // SP

  std::cout << "pseudonym:        " << pseudonym.Encoded() << "\n"
            << "direct evaluation: " << core::DerivePseudonymDirect<G>(user_id, audience).Encoded() << "\n";
  return pseudonym == core::DerivePseudonymDirect<G>(user_id, audience) ? 0 : 1;
}
