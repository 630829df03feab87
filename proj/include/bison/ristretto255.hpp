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

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "bison/group.hpp"

namespace bison {

// ristretto255 via libsodium, hashed with SHA-512.
//
// HashToGroup is hash_to_ristretto255 from RFC 9380: expand_message_xmd
// (SHA-512) to 64 uniform bytes followed by the one-way map of RFC 9496.
// Scalars are 32-byte little-endian and must be reduced and non-zero.
class Ristretto255 {
 public:
  static constexpr std::size_t kElementBytes = crypto_core_ristretto255_BYTES;
  static constexpr std::size_t kScalarBytes = crypto_core_ristretto255_SCALARBYTES;
  static constexpr std::size_t kRandomBytes = crypto_core_ristretto255_NONREDUCEDSCALARBYTES;

  static constexpr std::string_view kHashToGroupDst = "bison-oidc-v1-ristretto255_XMD:SHA-512_R255MAP_RO_";
  static constexpr std::string_view kHashToScalarDst = "bison-oidc-v1-ristretto255-HashToScalar";

  class Element {
   public:
    const std::array<std::uint8_t, kElementBytes>& bytes() const { return b_; }
    friend bool operator==(const Element&, const Element&) = default;

   private:
    friend class Ristretto255;
    explicit Element(const std::array<std::uint8_t, kElementBytes>& b) : b_(b) {}
    std::array<std::uint8_t, kElementBytes> b_;
  };

  class Scalar {
   public:
    const std::array<std::uint8_t, kScalarBytes>& bytes() const { return b_; }
    friend bool operator==(const Scalar&, const Scalar&) = default;

   private:
    friend class Ristretto255;
    explicit Scalar(const std::array<std::uint8_t, kScalarBytes>& b) : b_(b) {}
    std::array<std::uint8_t, kScalarBytes> b_;
  };

  // Prime order, 2^252 + 27742317777372353535851937790883648493.
  static const GroupDescriptor& Descriptor() {
    static const GroupDescriptor d{
        "ristretto255-sha512",
        "7237005577332262213973186563042994240857116359379907606001950938285454250989",
        kElementBytes, kScalarBytes};
    return d;
  }

  static Element Generator() {
    std::array<std::uint8_t, kScalarBytes> one{1};
    std::array<std::uint8_t, kElementBytes> out{};
    EnsureSodium();
    crypto_scalarmult_ristretto255_base(out.data(), one.data());
    return Element(out);
  }

  static Element HashToGroup(std::span<const std::uint8_t> input) {
    EnsureSodium();
    NoteHashEval();
    Bytes msg(input.begin(), input.end());
    for (std::uint8_t counter = 0;; ++counter) {
      const Bytes uniform = ExpandMessageXmdSha512(msg, kHashToGroupDst, 64);
      std::array<std::uint8_t, kElementBytes> out{};
      crypto_core_ristretto255_from_hash(out.data(), uniform.data());
      if (!IsZero(out)) return Element(out);
      // Unreachable in practice: the map hits the identity with
      // probability ~2^-252.
      if (counter == 0) msg.push_back(0);
      msg.back() = static_cast<std::uint8_t>(counter + 1);
    }
  }

  static Scalar HashToScalar(std::span<const std::uint8_t> input) {
    EnsureSodium();
    NoteHashEval();
    Bytes msg(input.begin(), input.end());
    for (std::uint8_t counter = 0;; ++counter) {
      const Bytes uniform = ExpandMessageXmdSha512(msg, kHashToScalarDst, 64);
      if (auto s = ScalarFromRandom(uniform)) return *s;
      if (counter == 0) msg.push_back(0);
      msg.back() = static_cast<std::uint8_t>(counter + 1);
    }
  }

  static Element Mult(const Scalar& s, const Element& x) {
    EnsureSodium();
    NoteScalarMult();
    std::array<std::uint8_t, kElementBytes> out{};
    // Fails only if the result is the identity, impossible for s != 0 in a
    // prime-order group.
    if (crypto_scalarmult_ristretto255(out.data(), s.b_.data(), x.b_.data()) != 0) {
      throw Error(ErrorCode::kMalformedEncoding, "scalar multiplication produced the identity");
    }
    return Element(out);
  }

  static Scalar Invert(const Scalar& s) {
    std::array<std::uint8_t, kScalarBytes> out{};
    crypto_core_ristretto255_scalar_invert(out.data(), s.b_.data());
    return Scalar(out);
  }

  static Scalar MulScalars(const Scalar& a, const Scalar& b) {
    std::array<std::uint8_t, kScalarBytes> out{};
    crypto_core_ristretto255_scalar_mul(out.data(), a.b_.data(), b.b_.data());
    return Scalar(out);
  }

  static Bytes EncodeElement(const Element& x) { return Bytes(x.b_.begin(), x.b_.end()); }

  static Element DecodeElement(std::span<const std::uint8_t> bytes) {
    EnsureSodium();
    if (bytes.size() != kElementBytes) {
      throw Error(ErrorCode::kMalformedEncoding, "element encoding has wrong length");
    }
    std::array<std::uint8_t, kElementBytes> b{};
    std::copy(bytes.begin(), bytes.end(), b.begin());
    if (IsZero(b)) throw Error(ErrorCode::kMalformedEncoding, "identity element");
    if (crypto_core_ristretto255_is_valid_point(b.data()) != 1) {
      throw Error(ErrorCode::kMalformedEncoding, "non-canonical or invalid ristretto255 encoding");
    }
    return Element(b);
  }

  static Bytes EncodeScalar(const Scalar& s) { return Bytes(s.b_.begin(), s.b_.end()); }

  static Scalar DecodeScalar(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kScalarBytes) {
      throw Error(ErrorCode::kMalformedEncoding, "scalar encoding has wrong length");
    }
    std::array<std::uint8_t, kScalarBytes> b{};
    std::copy(bytes.begin(), bytes.end(), b.begin());
    if (!LessThanOrder(b)) throw Error(ErrorCode::kMalformedEncoding, "non-canonical scalar");
    if (IsZero(b)) throw Error(ErrorCode::kMalformedEncoding, "zero scalar");
    return Scalar(b);
  }

  // Wide reduction of 64 bytes; the bias is ~2^-256.
  static std::optional<Scalar> ScalarFromRandom(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kRandomBytes) return std::nullopt;
    std::array<std::uint8_t, kScalarBytes> out{};
    crypto_core_ristretto255_scalar_reduce(out.data(), bytes.data());
    if (IsZero(out)) return std::nullopt;
    return Scalar(out);
  }

 private:
  template <std::size_t N>
  static bool IsZero(const std::array<std::uint8_t, N>& b) {
    return sodium_is_zero(b.data(), N) == 1;
  }

  static bool LessThanOrder(const std::array<std::uint8_t, kScalarBytes>& s) {
    static constexpr std::array<std::uint8_t, kScalarBytes> kL = {
        0xed, 0xd3, 0xf5, 0x5c, 0x1a, 0x63, 0x12, 0x58, 0xd6, 0x9c, 0xf7,
        0xa2, 0xde, 0xf9, 0xde, 0x14, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
        0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x10};
    for (std::size_t i = kScalarBytes; i-- > 0;) {
      if (s[i] != kL[i]) return s[i] < kL[i];
    }
    return false;
  }
};

static_assert(PrimeOrderGroup<Ristretto255>);

}  // namespace bison
