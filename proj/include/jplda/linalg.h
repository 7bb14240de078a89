// include/jplda/linalg.h

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

#ifndef JPLDA_LINALG_H_
#define JPLDA_LINALG_H_

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <span>
#include <string>

namespace jplda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Cholesky = Eigen::LLT<Matrix>;

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// Factorizes a symmetric positive definite matrix. Throws NumericalError
/// naming `what` if the matrix is not positive definite.
Cholesky FactorOrThrow(const Matrix &m, const std::string &what);

/// log|A| from its Cholesky factor.
double LogDet(const Cholesky &chol);

/// log(exp(a) + exp(b)) without overflow; -inf arguments are allowed.
double LogSumExp(double a, double b);

/// max_ij |a_ij - b_ij| / max(1, max_ij |b_ij|).
double RelativeError(const Matrix &a, const Matrix &b);
double RelativeError(double a, double b);

double MaxAbs(const Matrix &m);

}  // namespace jplda

#endif  // JPLDA_LINALG_H_
