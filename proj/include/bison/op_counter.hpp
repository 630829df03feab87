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

#include <cstdint>

namespace bison {

// Tallies the expensive primitive operations performed on the current
// thread. Group backends and the counted hash helpers report into whichever
// counter is installed by the innermost CountingScope.
struct OpCounter {
  std::uint64_t scalar_mults = 0;
  std::uint64_t hash_evals = 0;
};

namespace detail {
inline thread_local OpCounter* active_counter = nullptr;
}  // namespace detail

// Installs `counter` for the lifetime of the scope. The counter is zeroed on
// entry; scopes nest, restoring the outer counter on exit.
class CountingScope {
 public:
  explicit CountingScope(OpCounter& counter)
      : previous_(detail::active_counter) {
    counter = OpCounter{};
    detail::active_counter = &counter;
  }
  ~CountingScope() { detail::active_counter = previous_; }

  CountingScope(const CountingScope&) = delete;
  CountingScope& operator=(const CountingScope&) = delete;

 private:
  OpCounter* previous_;
};

inline void NoteScalarMult() {
  if (detail::active_counter != nullptr) ++detail::active_counter->scalar_mults;
}

inline void NoteHashEval() {
  if (detail::active_counter != nullptr) ++detail::active_counter->hash_evals;
}

}  // namespace bison
