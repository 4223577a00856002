/*
 *     Copyright 2026 The ecnprobe Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ecnprobe::cli {

/// Process exit codes of the `ecnprobe` tool.
enum ExitCode : int {
    kPropagatesCorrectly = 0,
    kDoesNotPropagate = 1,
    kUnknown = 2,
    kControlFailure = 3,
    kConfigError = 64,
};

/// Entry point behind main(); `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ecnprobe::cli
