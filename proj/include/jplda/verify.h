// include/jplda/verify.h

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

#ifndef JPLDA_VERIFY_H_
#define JPLDA_VERIFY_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jplda {

// Randomized self-checks of the library against the dense oracles. Every
// random instance k of a suite is generated from its own seed (base + k),
// and a failing property reports the first seed that broke it, so
// `verify --seed <that seed> --instances 1` reproduces it.

inline constexpr double kOracleTolerance = 1e-8;
inline constexpr double kConsistencyTolerance = 1e-10;
inline constexpr double kMonotonicityTolerance = 1e-9;

struct VerifyOptions {
  std::uint64_t seed = 20261015;
  int instances = 50;  // small posterior / likelihood / E-step problems
  int trials = 100;    // scoring trials per property
  int em_iterations = 30;
};

struct PropertyResult {
  std::string suite;
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  std::optional<std::uint64_t> failing_seed;
  int checked = 0;  // instances or trials

  // Folds one observation in; the first one above tolerance pins the seed.
  void Observe(double error, std::uint64_t seed);
};

/// "posterior", "likelihood", "estep", "em", "degeneracy", "scoring",
/// "consistency".
const std::vector<std::string> &VerifySuiteNames();

/// Throws std::invalid_argument on an unknown suite name.
std::vector<PropertyResult> RunVerifySuite(const std::string &suite,
                                           const VerifyOptions &options);

/// Largest relative drop (LL[k-1] - LL[k]) / |LL[k-1]| over the trace; zero
/// or negative for a non-decreasing sequence.
double WorstLikelihoodDecrease(std::span<const double> log_likelihoods);

void PrintPropertyResult(std::ostream &os, const PropertyResult &result);

}  // namespace jplda

#endif  // JPLDA_VERIFY_H_
