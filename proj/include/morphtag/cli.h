// Copyright 2026 The Morphtag Authors. All Rights Reserved.
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

#ifndef MORPHTAG_CLI_H_
#define MORPHTAG_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace morphtag::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitInternal = 3,
};

// Runs the command line `args` (args[0] is the program name) with
// subcommands train-crf, train-hmm, tag, eval and experiment.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Parses "0.5,0.3,0.2" into exactly `count` values summing to 1 within
// 1e-9. Throws ConfigError.
std::vector<double> ParseCoefficients(const std::string& text, std::size_t count);

}  // namespace morphtag::cli

#endif  // MORPHTAG_CLI_H_
