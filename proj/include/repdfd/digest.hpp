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

#ifndef REPDFD_DIGEST_HPP_
#define REPDFD_DIGEST_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace repdfd {

// Incremental SHA-256 over parameter bytes. Doubles are hashed by their
// little-endian IEEE bit pattern so digests are platform independent.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const std::uint8_t> bytes);
  Sha256& update(std::string_view text);
  Sha256& update(std::uint64_t value);
  Sha256& update(double value);
  Sha256& update(const Eigen::MatrixXd& m);
  Sha256& update(const Eigen::VectorXd& v);

  // Finalizes and returns a lowercase hex digest. The hasher is spent after.
  std::string hex();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::span<const std::uint8_t> bytes);

}  // namespace repdfd

#endif  // REPDFD_DIGEST_HPP_
