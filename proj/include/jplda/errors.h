// include/jplda/errors.h

// Copyright 2026  The jplda Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef JPLDA_ERRORS_H_
#define JPLDA_ERRORS_H_

#include <stdexcept>
#include <string>

namespace jplda {

/// Malformed or inconsistent input data: bad dimensions, unknown ids,
/// unparsable records. Messages name the offending item.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string &what) : std::runtime_error(what) {}
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string &what) : std::runtime_error(what) {}
};

/// A factorization failed or an estimate left the valid parameter set.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string &what)
      : std::runtime_error(what) {}
};

/// A dense solve would exceed the configured size limit.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string &what)
      : std::runtime_error(what) {}
};

}  // namespace jplda

#endif  // JPLDA_ERRORS_H_
