// Copyright 2026 The modpol Authors
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

#ifndef MODPOL_ERRORS_HPP_
#define MODPOL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace modpol {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tensor or array dimensions do not line up.
struct ShapeError : Error {
  using Error::Error;
};

/// A caller violated an API contract (wrong call order, bad argument class).
struct ContractError : Error {
  using Error::Error;
};

/// Inconsistent or invalid configuration values.
struct ConfigError : Error {
  using Error::Error;
};

/// Input data is missing a required field or is internally inconsistent.
struct DataError : Error {
  using Error::Error;
};

/// File I/O failure, corruption, or format mismatch.
struct IoError : Error {
  using Error::Error;
};

/// A Cartesian target lies outside the arm workspace.
struct ReachError : Error {
  using Error::Error;
};

}  // namespace modpol

#endif  // MODPOL_ERRORS_HPP_
