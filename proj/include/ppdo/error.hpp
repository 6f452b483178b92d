// Copyright 2026 The ppdo Authors.
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

#ifndef PPDO_ERROR_HPP
#define PPDO_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ppdo {

/// Base for every error raised by the library. what() is prefixed with the
/// module that raised it, e.g. "optcore: ...".
class Error : public std::runtime_error {
 public:
  Error(const std::string& module, const std::string& message)
      : std::runtime_error(module + ": " + message), module_(module) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

#define PPDO_DEFINE_ERROR(Name)                                      \
  class Name : public Error {                                        \
   public:                                                           \
    using Error::Error;                                              \
  }

PPDO_DEFINE_ERROR(DimensionError);
PPDO_DEFINE_ERROR(DomainError);
PPDO_DEFINE_ERROR(ConfigError);
PPDO_DEFINE_ERROR(DivergenceError);
PPDO_DEFINE_ERROR(OverflowError);
PPDO_DEFINE_ERROR(ContractError);
PPDO_DEFINE_ERROR(SchemeMismatchError);
PPDO_DEFINE_ERROR(UnsupportedOperationError);
PPDO_DEFINE_ERROR(ProtocolError);
PPDO_DEFINE_ERROR(KeyMismatchError);
PPDO_DEFINE_ERROR(SecurityRegressionError);

#undef PPDO_DEFINE_ERROR

}  // namespace ppdo

#endif  // PPDO_ERROR_HPP
