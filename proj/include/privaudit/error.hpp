// Copyright 2026 The privaudit Authors
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

#ifndef PRIVAUDIT_ERROR_HPP
#define PRIVAUDIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace privaudit {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input dimensions do not match a model or dataset contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A computation produced or would produce non-finite values. Training
// divergence reports the failing iteration index in the message.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration (bad field values, missing fields, inconsistent
// experiment setup). Messages name the offending field where possible.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A structural invariant of a domain value is violated (e.g. a confidence
// vector that does not sum to one).
class InvariantError : public Error {
 public:
  using Error::Error;
};

// An argument lies outside a mathematical domain (e.g. Lambert W branch).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Filesystem / serialization failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace privaudit

#endif  // PRIVAUDIT_ERROR_HPP
