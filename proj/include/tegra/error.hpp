// Copyright 2026 The tegra Authors.
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

#ifndef TEGRA_ERROR_HPP_
#define TEGRA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace tegra {

// Every failure surfaced by the library derives from Error. kind() is a
// stable lowercase tag used by the CLI for its machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define TEGRA_DEFINE_ERROR(Name, tag)                                  \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(tag, message) {} \
  }

TEGRA_DEFINE_ERROR(ParseError, "parse");
TEGRA_DEFINE_ERROR(ValidationError, "validation");
TEGRA_DEFINE_ERROR(FormatError, "format");
TEGRA_DEFINE_ERROR(SizeError, "size");
TEGRA_DEFINE_ERROR(ShapeError, "shape");
TEGRA_DEFINE_ERROR(ConfigError, "config");
TEGRA_DEFINE_ERROR(LookupError, "lookup");
TEGRA_DEFINE_ERROR(NumericError, "numeric");
TEGRA_DEFINE_ERROR(RemoteError, "remote");
TEGRA_DEFINE_ERROR(ProtocolError, "protocol");
TEGRA_DEFINE_ERROR(IoError, "io");
TEGRA_DEFINE_ERROR(ConsistencyError, "consistency");
TEGRA_DEFINE_ERROR(UsageError, "usage");

#undef TEGRA_DEFINE_ERROR

}  // namespace tegra

#endif  // TEGRA_ERROR_HPP_
