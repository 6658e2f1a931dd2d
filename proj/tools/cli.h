// Copyright 2026 The TMQL Authors
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

#ifndef TMQL_TOOLS_CLI_H_
#define TMQL_TOOLS_CLI_H_

#include <string>
#include <vector>

namespace tmql::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kNotConverged = 3,
  kIoError = 4,
};

// Entry point shared by the binary and the tests. args[0] is the program
// name. Output goes to stdout / stderr.
int Run(const std::vector<std::string>& args);

}  // namespace tmql::cli

#endif  // TMQL_TOOLS_CLI_H_
