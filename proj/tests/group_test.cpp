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

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "bison/encoding.hpp"
#include "bison/ristretto255.hpp"
#include "bison/test_group.hpp"

namespace bison {
namespace {

using TG = TestGroup;
using R = Ristretto255;

// Oracle: the subgroup generated by 2 in (Z/23Z)^x, by repeated
// multiplication.
std::vector<std::uint32_t> EnumerateSubgroup() {
  std::vector<std::uint32_t> out;
  std::uint32_t x = 1;
  do {
    x = x * 2 % 23;
    out.push_back(x);
  } while (x != 1);
  return out;
}

std::uint32_t PowModOracle(std::uint32_t b, std::uint32_t e, std::uint32_t m) {
  std::uint32_t r = 1;
  for (std::uint32_t i = 0; i < e; ++i) r = r * b % m;
  return r;
}

TEST(TestGroupTest, SubgroupEnumeration) {
  const std::vector<std::uint32_t> expected = {2, 4, 8, 16, 9, 18, 13, 3, 6, 12, 1};
  EXPECT_EQ(EnumerateSubgroup(), expected);
  std::vector<std::uint32_t> elems;
  for (const auto& e : TG::AllElements()) elems.push_back(e.residue());
  std::vector<std::uint32_t> non_identity(expected.begin(), expected.end() - 1);
  std::sort(elems.begin(), elems.end());
  std::sort(non_identity.begin(), non_identity.end());
  EXPECT_EQ(elems, non_identity);
}

TEST(TestGroupTest, DescriptorIsPrimeOrder) {
  EXPECT_EQ(TG::Descriptor().order, "11");
  EXPECT_TRUE(detail::IsPrime(11));
  EXPECT_EQ(TG::Descriptor().element_byte_length, 2u);
  EXPECT_EQ(TG::Descriptor().scalar_byte_length, 2u);
}

TEST(TestGroupTest, ScalarMultMatchesModExp) {
  EXPECT_EQ(TG::Mult(TG::ScalarFromValue(3), TG::ElementFromResidue(4)).residue(), 18u);
  for (const auto& x : TG::AllElements()) {
    EXPECT_EQ(TG::Mult(TG::ScalarFromValue(1), x), x);
    for (const auto& s : TG::AllScalars()) {
      EXPECT_EQ(TG::Mult(s, x).residue(), PowModOracle(x.residue(), s.value(), 23));
    }
  }
}

TEST(TestGroupTest, GroupLawForScalars) {
  for (const auto& x : TG::AllElements()) {
    for (const auto& a : TG::AllScalars()) {
      for (const auto& b : TG::AllScalars()) {
        EXPECT_EQ(TG::Mult(a, TG::Mult(b, x)), TG::Mult(TG::MulScalars(a, b), x));
      }
    }
  }
}

TEST(TestGroupTest, InvertByExhaustiveSearch) {
  EXPECT_EQ(TG::Invert(TG::ScalarFromValue(3)).value(), 4u);
  EXPECT_EQ(TG::Invert(TG::ScalarFromValue(1)).value(), 1u);
  for (const auto& s : TG::AllScalars()) {
    std::uint32_t oracle = 0;
    for (std::uint32_t c = 1; c < 11; ++c) {
      if (s.value() * c % 11 == 1) oracle = c;
    }
    EXPECT_EQ(TG::Invert(s).value(), oracle);
    EXPECT_EQ(TG::Invert(TG::Invert(s)), s);
  }
}

TEST(TestGroupTest, BlindingRoundTripExhaustive) {
  for (const auto& x : TG::AllElements()) {
    for (const auto& s : TG::AllScalars()) {
      EXPECT_EQ(TG::Mult(TG::Invert(s), TG::Mult(s, x)), x);
    }
  }
}

TEST(TestGroupTest, MultIsBijectionOnNonIdentity) {
  for (const auto& x : TG::AllElements()) {
    std::set<std::uint32_t> image;
    for (const auto& s : TG::AllScalars()) image.insert(TG::Mult(s, x).residue());
    EXPECT_EQ(image.size(), 10u);
    EXPECT_FALSE(image.contains(1));
  }
}

TEST(TestGroupTest, HashToGroupVectors) {
  // Oracle: 2^(SHA-512(input) mod 10 + 1) mod 23, computed independently.
  EXPECT_EQ(HashToGroup<TG>("example.com").residue(), 9u);
  EXPECT_EQ(HashToGroup<TG>("other.com").residue(), 16u);
  EXPECT_EQ(HashToGroup<TG>("login.example.com").residue(), 4u);
  EXPECT_EQ(HashToGroup<TG>("").residue(), 13u);
  EXPECT_EQ(HashToGroup<TG>("example.com"), HashToGroup<TG>("example.com"));
}

TEST(TestGroupTest, HashToGroupNeverIdentity) {
  const auto members = EnumerateSubgroup();
  for (int i = 0; i < 10000; ++i) {
    const auto x = HashToGroup<TG>("input-" + std::to_string(i));
    EXPECT_NE(x.residue(), 1u);
    EXPECT_NE(std::find(members.begin(), members.end(), x.residue()), members.end());
  }
}

TEST(TestGroupTest, RandomScalarIsUniform) {
  SeededEntropy entropy(42);
  std::map<std::uint32_t, int> counts;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    const auto s = RandomScalar<TG>(entropy);
    ASSERT_NE(s.value(), 0u);
    ++counts[s.value()];
  }
  ASSERT_EQ(counts.size(), 10u);
  double stat = 0;
  for (const auto& [_, c] : counts) stat += std::pow(c - kDraws / 10.0, 2) / (kDraws / 10.0);
  EXPECT_LT(stat, 27.877164871256568);  // chi-square 0.999 quantile, 9 dof
}

TEST(TestGroupTest, EncodingRoundTripAndRejection) {
  for (const auto& x : TG::AllElements()) {
    EXPECT_EQ(TG::DecodeElement(TG::EncodeElement(x)), x);
  }
  for (const auto& s : TG::AllScalars()) {
    EXPECT_EQ(TG::DecodeScalar(TG::EncodeScalar(s)), s);
  }
  EXPECT_EQ(TG::EncodeElement(TG::ElementFromResidue(18)), (Bytes{0x00, 0x12}));
  auto expect_malformed = [](auto fn) {
    try {
      fn();
      ADD_FAILURE() << "expected MalformedEncoding";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kMalformedEncoding);
    }
  };
  expect_malformed([] { TG::DecodeElement(Bytes{0, 0}); });
  expect_malformed([] { TG::DecodeElement(Bytes{0, 1}); });    // identity
  expect_malformed([] { TG::DecodeElement(Bytes{0, 5}); });    // not in subgroup
  expect_malformed([] { TG::DecodeElement(Bytes{0, 25}); });   // 25 = 2 mod 23, non-canonical
  expect_malformed([] { TG::DecodeElement(Bytes{4}); });       // truncated
  expect_malformed([] { TG::DecodeScalar(Bytes{0, 0}); });     // zero
  expect_malformed([] { TG::DecodeScalar(Bytes{0, 11}); });    // non-canonical
  expect_malformed([] { TG::DecodeScalar(Bytes{0, 1, 0}); });  // wrong length
}

// --- ristretto255 ----------------------------------------------------------

TEST(Ristretto255Test, ExpandMessageXmdMatchesReferenceVectors) {
  // Reference values from an independent Python implementation of
  // expand_message_xmd (hashlib); the first matches RFC 9380 Appendix K.3.
  constexpr std::string_view kDst = "QUUX-V01-CS02-with-expander-SHA512-256";
  EXPECT_EQ(HexEncode(ExpandMessageXmdSha512(AsBytes(""), kDst, 0x20)),
            "6b9a7312411d92f921c6f68ca0b6380730a1a4d982c507211a90964c394179ba");
  EXPECT_EQ(HexEncode(ExpandMessageXmdSha512(AsBytes("abc"), kDst, 0x20)),
            "0da749f12fbe5483eb066a5f595055679b976e93abe9be6f0f6318bce7aca8dc");
  EXPECT_EQ(HexEncode(ExpandMessageXmdSha512(AsBytes("abcdef0123456789"), kDst, 0x80)),
            "3f721f208e6199fe903545abc26c837ce59ac6fa45733f1baaf0222f8b7acb04"
            "24814fcb5eecf6c1d38f06e9d0a6ccfbf85ae612ab8735dfdf9ce84c372a77c8"
            "f9e1c1e952c3a61b7567dd0693016af51d2745822663d0c2367e3f4f0bed827f"
            "eecc2aaf98c949b5ed0d35c3f1023d64ad1407924288d366ea159f46287e61ac");
}

TEST(Ristretto255Test, HashToGroupDeterministicAndDistinct) {
  EXPECT_EQ(HashToGroup<R>("example.com"), HashToGroup<R>("example.com"));
  EXPECT_NE(HashToGroup<R>("example.com"), HashToGroup<R>("other.com"));
  EXPECT_NO_THROW(R::DecodeElement(R::EncodeElement(HashToGroup<R>(""))));
}

TEST(Ristretto255Test, BlindingRoundTripRandomized) {
  for (int i = 0; i < 1000; ++i) {
    const auto x = HashToGroup<R>("point-" + std::to_string(i));
    const auto s = RandomScalar<R>();
    EXPECT_EQ(R::Mult(R::Invert(s), R::Mult(s, x)), x);
  }
}

TEST(Ristretto255Test, EncodingRoundTrip) {
  for (int i = 0; i < 1000; ++i) {
    const auto x = R::Mult(RandomScalar<R>(), R::Generator());
    EXPECT_EQ(R::DecodeElement(R::EncodeElement(x)), x);
    const auto s = RandomScalar<R>();
    EXPECT_EQ(R::DecodeScalar(R::EncodeScalar(s)), s);
  }
}

TEST(Ristretto255Test, DecodeRejectsMalformed) {
  auto code_of = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kTransport;  // sentinel: no error
  };
  const Bytes zeros(32, 0);
  EXPECT_EQ(code_of([&] { R::DecodeElement(zeros); }), ErrorCode::kMalformedEncoding);
  EXPECT_EQ(code_of([&] { R::DecodeScalar(zeros); }), ErrorCode::kMalformedEncoding);
  const Bytes enc = R::EncodeElement(R::Generator());
  EXPECT_EQ(code_of([&] { R::DecodeElement(std::span(enc).first(31)); }), ErrorCode::kMalformedEncoding);
  // Field element >= p is non-canonical.
  Bytes high(32, 0xff);
  high[31] = 0x7f;
  EXPECT_EQ(code_of([&] { R::DecodeElement(high); }), ErrorCode::kMalformedEncoding);
  // The group order itself is a non-canonical scalar encoding of zero.
  const Bytes order = HexDecode("edd3f55c1a631258d69cf7a2def9de1400000000000000000000000000000010");
  EXPECT_EQ(code_of([&] { R::DecodeScalar(order); }), ErrorCode::kMalformedEncoding);
  Bytes order_minus_one = order;
  order_minus_one[0] -= 1;
  EXPECT_NO_THROW(R::DecodeScalar(order_minus_one));
}

TEST(Ristretto255Test, RandomScalarsDoNotCollide) {
  std::set<Bytes> seen;
  for (int i = 0; i < 10000; ++i) seen.insert(R::EncodeScalar(RandomScalar<R>()));
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(Ristretto255Test, ScalarInverse) {
  const auto one = R::DecodeScalar(HexDecode("0100000000000000000000000000000000000000000000000000000000000000"));
  EXPECT_EQ(R::Invert(one), one);
  for (int i = 0; i < 100; ++i) {
    const auto s = RandomScalar<R>();
    EXPECT_EQ(R::MulScalars(s, R::Invert(s)), one);
    EXPECT_EQ(R::Invert(R::Invert(s)), s);
  }
}

// --- op counter -------------------------------------------------------------

TEST(OpCounterTest, CountsOnlyInsideScope) {
  const auto x = HashToGroup<R>("x");
  const auto s = RandomScalar<R>();
  OpCounter counter;
  {
    CountingScope scope(counter);
    (void)R::Mult(s, x);
    (void)HashToGroup<R>("y");
    (void)R::Invert(s);
  }
  (void)R::Mult(s, x);
  EXPECT_EQ(counter.scalar_mults, 1u);
  EXPECT_EQ(counter.hash_evals, 1u);
}

TEST(OpCounterTest, NestedScopesRestoreOuter) {
  OpCounter outer;
  OpCounter inner;
  CountingScope a(outer);
  (void)TG::Mult(TG::ScalarFromValue(2), TG::Generator());
  {
    CountingScope b(inner);
    (void)TG::Mult(TG::ScalarFromValue(2), TG::Generator());
    (void)TG::Mult(TG::ScalarFromValue(2), TG::Generator());
  }
  (void)TG::Mult(TG::ScalarFromValue(2), TG::Generator());
  EXPECT_EQ(outer.scalar_mults, 2u);
  EXPECT_EQ(inner.scalar_mults, 2u);
}

TEST(EncodingTest, Base64UrlStrict) {
  EXPECT_EQ(Base64UrlEncode(AsBytes("\xfb\xff")), "-_8");
  EXPECT_EQ(Base64UrlDecode("-_8"), ToBytes("\xfb\xff"));
  EXPECT_THROW(Base64UrlDecode("-_8="), Error);
  EXPECT_THROW(Base64UrlDecode("+/8"), Error);
}

}  // namespace
}  // namespace bison
