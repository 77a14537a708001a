/**
 * Copyright 2026 The dvfi Authors
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

namespace dvfi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// I/O failures. Each failure mode gets its own type so callers (and tests)
// can tell a missing file from a malformed one.
class IoError : public Error {
 public:
  using Error::Error;
};

class FileNotFound : public IoError {
 public:
  using IoError::IoError;
};

class UnsupportedFormat : public IoError {
 public:
  using IoError::IoError;
};

class TruncatedData : public IoError {
 public:
  using IoError::IoError;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, long last_finite_step)
      : Error(what), last_finite_step_(last_finite_step) {}
  long last_finite_step() const noexcept { return last_finite_step_; }

 private:
  long last_finite_step_;
};

}  // namespace dvfi
