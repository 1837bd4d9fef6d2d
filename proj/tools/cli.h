// cli.h
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Copyright 2026 The persel Authors. All Rights Reserved.

#ifndef PERSEL_TOOLS_CLI_H_
#define PERSEL_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace persel {
namespace cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitIo = 3;

// Runs the persel command line. `args` excludes the program name.
int Run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err);

}  // namespace cli
}  // namespace persel

#endif  // PERSEL_TOOLS_CLI_H_
