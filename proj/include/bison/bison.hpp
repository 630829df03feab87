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

#include "bison/agent.hpp"
#include "bison/core.hpp"
#include "bison/error.hpp"
#include "bison/group.hpp"
#include "bison/harness.hpp"
#include "bison/idp.hpp"
#include "bison/oidc.hpp"
#include "bison/public_suffix.hpp"
#include "bison/ristretto255.hpp"
#include "bison/sp.hpp"
#include "bison/test_group.hpp"
#include "bison/token.hpp"
