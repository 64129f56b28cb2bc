/*
 * Copyright 2026 The trex Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TREX_ERRORS_H_
#define TREX_ERRORS_H_

#include <stdexcept>
#include <string>

namespace trex {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data could not be parsed or does not match its schema.
class DataError : public Error {
 public:
  using Error::Error;
};

// Optimization diverged (e.g. a NaN loss).
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch)
      : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// A numerical quantity is undefined for the given input.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace trex

#endif  // TREX_ERRORS_H_
