// Copyright 2026 The SpoofKit Authors
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

#ifndef SPOOFKIT_ERRORS_HPP_
#define SPOOFKIT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace spoofkit {

// Base class for all spoofkit errors. Subclasses map onto CLI exit codes:
// validation/parse/format -> 2 or 3 depending on context, missing input -> 4.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// File content does not match a supported encoding (codec, channel layout,
// bit depth).
class FormatError : public Error {
 public:
  using Error::Error;
};

// File content is structurally broken (truncated chunk, malformed line).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Values violate a documented contract (duplicate ids, bad fractions,
// out-of-range parameters, mismatched pair lengths).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A required input path does not exist.
class MissingInputError : public Error {
 public:
  using Error::Error;
};

// Read or write failed at the OS level.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace spoofkit

#endif  // SPOOFKIT_ERRORS_HPP_
