// Copyright 2026 The repdfd Authors
// SPDX-License-Identifier: Apache-2.0
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

#ifndef REPDFD_TOOLS_CLI_HPP_
#define REPDFD_TOOLS_CLI_HPP_

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace repdfd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Flat key=value settings. Later layers win: defaults, --config file,
// --set overrides, then dedicated flags.
class Settings {
 public:
  Settings();

  // Throws ConfigError for keys that are not recognized.
  void set(const std::string& key, const std::string& value);
  // Returns the keys the file set.
  std::vector<std::string> load_file(const std::string& path);
  const std::string& get(std::string_view key) const;
  bool is_known(std::string_view key) const;
  const std::map<std::string, std::string, std::less<>>& values() const {
    return values_;
  }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

// Parses argv and runs one command. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace repdfd::cli

#endif  // REPDFD_TOOLS_CLI_HPP_
