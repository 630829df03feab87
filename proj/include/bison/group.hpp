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

#include <array>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "bison/encoding.hpp"
#include "bison/error.hpp"
#include "bison/op_counter.hpp"

namespace bison {

struct GroupDescriptor {
  std::string name;
  std::string order;  // decimal
  std::size_t element_byte_length;
  std::size_t scalar_byte_length;
};

// A prime-order group backend. Elements are always non-identity and scalars
// always non-zero; every constructor and decoder enforces this, so values
// of these types can be used without further checks.
//
// Mult and the hash functions report to the active OpCounter.
template <class G>
concept PrimeOrderGroup = requires(std::span<const std::uint8_t> bytes,
                                   const typename G::Element& x,
                                   const typename G::Scalar& s) {
  { G::Descriptor() } -> std::same_as<const GroupDescriptor&>;
  { G::HashToGroup(bytes) } -> std::same_as<typename G::Element>;
  { G::HashToScalar(bytes) } -> std::same_as<typename G::Scalar>;
  { G::Mult(s, x) } -> std::same_as<typename G::Element>;
  { G::Invert(s) } -> std::same_as<typename G::Scalar>;
  { G::MulScalars(s, s) } -> std::same_as<typename G::Scalar>;
  { G::EncodeElement(x) } -> std::same_as<Bytes>;
  { G::DecodeElement(bytes) } -> std::same_as<typename G::Element>;
  { G::EncodeScalar(s) } -> std::same_as<Bytes>;
  { G::DecodeScalar(bytes) } -> std::same_as<typename G::Scalar>;
  { G::kRandomBytes } -> std::convertible_to<std::size_t>;
  { G::ScalarFromRandom(bytes) } -> std::same_as<std::optional<typename G::Scalar>>;
  { x == x } -> std::convertible_to<bool>;
  { s == s } -> std::convertible_to<bool>;
};

// An entropy source fills a buffer with random bytes, throwing on failure.
template <class E>
concept EntropySource = requires(E& e, std::span<std::uint8_t> out) { e(out); };

struct SystemEntropy {
  void operator()(std::span<std::uint8_t> out) const {
    EnsureSodium();
    randombytes_buf(out.data(), out.size());
  }
};

// Reproducible entropy for statistical tests and benchmarks. Not for keys.
class SeededEntropy {
 public:
  explicit SeededEntropy(std::uint64_t seed) : engine_(seed) {}

  void operator()(std::span<std::uint8_t> out) {
    for (auto& b : out) b = static_cast<std::uint8_t>(engine_() & 0xff);
  }

 private:
  std::mt19937_64 engine_;
};

/// Samples uniformly from the non-zero scalars by rejection.
template <PrimeOrderGroup G, EntropySource E>
typename G::Scalar RandomScalar(E& entropy) {
  std::array<std::uint8_t, G::kRandomBytes> buf{};
  for (int attempt = 0; attempt < 1024; ++attempt) {
    entropy(std::span<std::uint8_t>(buf));
    if (auto s = G::ScalarFromRandom(buf)) return *s;
  }
  throw Error(ErrorCode::kEntropyFailure, "entropy source produced only rejected samples");
}

template <PrimeOrderGroup G>
typename G::Scalar RandomScalar() {
  SystemEntropy entropy;
  return RandomScalar<G>(entropy);
}

template <PrimeOrderGroup G>
typename G::Element HashToGroup(std::string_view input) {
  return G::HashToGroup(AsBytes(input));
}

template <PrimeOrderGroup G>
std::string EncodeElementB64(const typename G::Element& x) {
  return Base64UrlEncode(G::EncodeElement(x));
}

template <PrimeOrderGroup G>
typename G::Element DecodeElementB64(std::string_view text) {
  return G::DecodeElement(Base64UrlDecode(text));
}

template <PrimeOrderGroup G>
std::string EncodeScalarB64(const typename G::Scalar& s) {
  return Base64UrlEncode(G::EncodeScalar(s));
}

template <PrimeOrderGroup G>
typename G::Scalar DecodeScalarB64(std::string_view text) {
  return G::DecodeScalar(Base64UrlDecode(text));
}

}  // namespace bison
