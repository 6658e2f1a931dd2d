// Copyright 2026 The TMQL Authors
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

#ifndef TMQL_ERRORS_H_
#define TMQL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace tmql {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on arguments or configuration was violated.
class UsageError : public Error {
 public:
  using Error::Error;
};

class NonFiniteEntry : public Error {
 public:
  using Error::Error;
};

// The simplex routine hit its pivot cap or failed its optimality certificate.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

class ConfigInfeasible : public Error {
 public:
  using Error::Error;
};

// A behavior policy gives zero probability to some action.
class DegenerateBehavior : public Error {
 public:
  using Error::Error;
};

class InvalidGame : public Error {
 public:
  using Error::Error;
};

// Fixed-point iteration ran out of sweeps; `residual()` is the last
// sup-norm Bellman residual.
class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// An iterate left the a-priori bound. Always an implementation bug.
class BoundViolation : public Error {
 public:
  using Error::Error;
};

class OutputUnwritable : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace tmql

#endif  // TMQL_ERRORS_H_
