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
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bison/error.hpp"
#include "bison/op_counter.hpp"

namespace bison {

using Bytes = std::vector<std::uint8_t>;
using Sha512Digest = std::array<std::uint8_t, crypto_hash_sha512_BYTES>;

// libsodium must be initialised once per process before any primitive runs.
inline void EnsureSodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw Error(ErrorCode::kEntropyFailure, "sodium_init failed");
}

inline std::span<const std::uint8_t> AsBytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline Bytes ToBytes(std::string_view s) {
  auto b = AsBytes(s);
  return Bytes(b.begin(), b.end());
}

inline std::string ToString(std::span<const std::uint8_t> b) {
  return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

// Plain SHA-512, not reported to the op counter. Used inside composite
// primitives that count themselves as a single evaluation.
inline Sha512Digest Sha512Raw(std::span<const std::uint8_t> data) {
  Sha512Digest out{};
  crypto_hash_sha512(out.data(), data.data(), data.size());
  return out;
}

// SHA-512 over the concatenation of the parts, counted as one hash
// evaluation.
inline Sha512Digest Sha512Concat(std::initializer_list<std::span<const std::uint8_t>> parts) {
  crypto_hash_sha512_state st;
  crypto_hash_sha512_init(&st);
  for (auto p : parts) crypto_hash_sha512_update(&st, p.data(), p.size());
  Sha512Digest out{};
  crypto_hash_sha512_final(&st, out.data());
  NoteHashEval();
  return out;
}

/// Unpadded base64url, the encoding used for every binary value that
/// crosses the wire (claims, query parameters, form fields).
inline std::string Base64UrlEncode(std::span<const std::uint8_t> data) {
  const int variant = sodium_base64_VARIANT_URLSAFE_NO_PADDING;
  std::string out(sodium_base64_ENCODED_LEN(data.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(), data.data(), data.size(), variant);
  out.resize(out.size() - 1);  // trailing NUL
  return out;
}

/// Strict decoder: rejects padding, whitespace and characters outside the
/// url-safe alphabet.
inline Bytes Base64UrlDecode(std::string_view text) {
  Bytes out(text.size() * 3 / 4 + 1);
  std::size_t len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, &end,
                        sodium_base64_VARIANT_URLSAFE_NO_PADDING) != 0 ||
      end != text.data() + text.size()) {
    throw Error(ErrorCode::kMalformedEncoding, "invalid base64url");
  }
  out.resize(len);
  return out;
}

inline std::string HexEncode(std::span<const std::uint8_t> data) {
  std::string out(data.size() * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), data.data(), data.size());
  out.pop_back();
  return out;
}

inline Bytes HexDecode(std::string_view hex) {
  Bytes out(hex.size() / 2);
  std::size_t len = 0;
  const char* end = nullptr;
  if (hex.size() % 2 != 0 ||
      sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(), nullptr, &len, &end) != 0 ||
      end != hex.data() + hex.size()) {
    throw Error(ErrorCode::kMalformedEncoding, "invalid hex");
  }
  out.resize(len);
  return out;
}

// RFC 9380 expand_message_xmd instantiated with SHA-512.
inline Bytes ExpandMessageXmdSha512(std::span<const std::uint8_t> msg, std::string_view dst,
                                    std::size_t len_in_bytes) {
  constexpr std::size_t kB = 64;   // output size
  constexpr std::size_t kR = 128;  // block size
  const std::size_t ell = (len_in_bytes + kB - 1) / kB;
  if (ell > 255 || len_in_bytes > 65535 || dst.size() > 255) {
    throw Error(ErrorCode::kMalformedEncoding, "expand_message_xmd: parameters out of range");
  }
  Bytes dst_prime(dst.begin(), dst.end());
  dst_prime.push_back(static_cast<std::uint8_t>(dst.size()));

  const std::array<std::uint8_t, kR> z_pad{};
  const std::array<std::uint8_t, 2> l_i_b{static_cast<std::uint8_t>(len_in_bytes >> 8),
                                          static_cast<std::uint8_t>(len_in_bytes & 0xff)};
  const std::array<std::uint8_t, 1> zero{0};

  auto hash = [](std::initializer_list<std::span<const std::uint8_t>> parts) {
    crypto_hash_sha512_state st;
    crypto_hash_sha512_init(&st);
    for (auto p : parts) crypto_hash_sha512_update(&st, p.data(), p.size());
    Sha512Digest out{};
    crypto_hash_sha512_final(&st, out.data());
    return out;
  };

  const Sha512Digest b0 = hash({z_pad, msg, l_i_b, zero, dst_prime});
  std::array<std::uint8_t, 1> idx{1};
  Sha512Digest bi = hash({b0, idx, dst_prime});

  Bytes uniform(bi.begin(), bi.end());
  for (std::size_t i = 2; i <= ell; ++i) {
    Sha512Digest x{};
    for (std::size_t j = 0; j < kB; ++j) x[j] = b0[j] ^ bi[j];
    idx[0] = static_cast<std::uint8_t>(i);
    bi = hash({x, idx, dst_prime});
    uniform.insert(uniform.end(), bi.begin(), bi.end());
  }
  uniform.resize(len_in_bytes);
  return uniform;
}

}  // namespace bison
