/**
 * Copyright 2026 The tabcl Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace tabcl {

// Every failure raised by the core derives from Error so the C boundary can
// translate it into a status code without knowing the concrete type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Matrix/vector dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An operation was called outside its precondition (wrong mode, bad index,
// uninitialized state).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Input data could not be parsed into a FeatureMatrix.
class IngestError : public Error {
 public:
  using Error::Error;
};

// A configuration key is unknown or its value is out of range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// NaN or infinity where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tabcl
