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

#include <stdexcept>
#include <string>
#include <string_view>

namespace bison {

enum class ErrorCode {
  // group / encoding
  kMalformedEncoding,
  kEntropyFailure,
  // token
  kBadSignature,
  kExpired,
  kWrongIssuer,
  kMalformedToken,
  kIssuanceFailure,
  // idp
  kSuspendedAccount,
  kUnknownAccount,
  kMalformedBlindedAudience,
  kInvalidRequest,
  // sp
  kReplayDetected,
  kBlindMismatch,
  kNonceBindingMismatch,
  kBadToken,
  kUnknownPending,
  // agent
  kConsentDenied,
  kNotSecureContext,
  kUnknownReturn,
  kStaleRecord,
  kTransport,
};

constexpr std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedEncoding: return "MalformedEncoding";
    case ErrorCode::kEntropyFailure: return "EntropyFailure";
    case ErrorCode::kBadSignature: return "BadSignature";
    case ErrorCode::kExpired: return "Expired";
    case ErrorCode::kWrongIssuer: return "WrongIssuer";
    case ErrorCode::kMalformedToken: return "MalformedToken";
    case ErrorCode::kIssuanceFailure: return "IssuanceFailure";
    case ErrorCode::kSuspendedAccount: return "SuspendedAccount";
    case ErrorCode::kUnknownAccount: return "UnknownAccount";
    case ErrorCode::kMalformedBlindedAudience: return "MalformedBlindedAudience";
    case ErrorCode::kInvalidRequest: return "InvalidRequest";
    case ErrorCode::kReplayDetected: return "ReplayDetected";
    case ErrorCode::kBlindMismatch: return "BlindMismatch";
    case ErrorCode::kNonceBindingMismatch: return "NonceBindingMismatch";
    case ErrorCode::kBadToken: return "BadToken";
    case ErrorCode::kUnknownPending: return "UnknownPending";
    case ErrorCode::kConsentDenied: return "ConsentDenied";
    case ErrorCode::kNotSecureContext: return "NotSecureContext";
    case ErrorCode::kUnknownReturn: return "UnknownReturn";
    case ErrorCode::kStaleRecord: return "StaleRecord";
    case ErrorCode::kTransport: return "Transport";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above so
// callers (and the HTTP layers) can branch on the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(ToString(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ErrorCodeName(const Error& e) { return ToString(e.code()); }

// Inverse of ToString; used when an error class travels over HTTP.
inline bool ParseErrorCode(std::string_view name, ErrorCode& out) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::kTransport); ++i) {
    auto c = static_cast<ErrorCode>(i);
    if (ToString(c) == name) {
      out = c;
      return true;
    }
  }
  return false;
}

}  // namespace bison
