/*
 * Copyright 2026 The scopesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file cli.hpp
 * @brief Command-line front-end, callable in-process for tests.
 *
 * Exit codes: 0 success, 1 failed result check, 2 bad flags or unreadable
 * input, 3 invalid configuration, 4 simulator deadlock, 5 litmus failure,
 * 6 state space too large.
 */

#pragma once

#include <ostream>

namespace scopesim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitBadFlags = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitDeadlock = 4;
inline constexpr int kExitLitmusFail = 5;
inline constexpr int kExitTooLarge = 6;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scopesim::cli
