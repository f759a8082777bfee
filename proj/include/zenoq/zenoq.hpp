// Copyright 2026 The zenoq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "zenoq/ansatz.hpp"
#include "zenoq/error.hpp"
#include "zenoq/experiments.hpp"
#include "zenoq/operators.hpp"
#include "zenoq/optimize.hpp"
#include "zenoq/oraclesim.hpp"
#include "zenoq/parallel.hpp"
#include "zenoq/problems.hpp"
#include "zenoq/qcore.hpp"
#include "zenoq/zeno.hpp"

namespace zenoq {

inline constexpr const char *kVersion = "0.1.0";

}  // namespace zenoq
