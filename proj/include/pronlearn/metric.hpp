// Copyright 2026 The pronlearn Authors.
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

#ifndef PRONLEARN_METRIC_HPP_
#define PRONLEARN_METRIC_HPP_

#include <Eigen/Core>

namespace pronlearn {

double symmetry_error(const Eigen::MatrixXd& a);
double min_eigenvalue(const Eigen::MatrixXd& a);

// Throws NotPositiveDefinite unless `a` is square, symmetric within 1e-9 and
// admits a Cholesky factorization.
void require_pd(const Eigen::MatrixXd& a, const char* what);

// (x - y)^T A (x - y).
double mahalanobis(const Eigen::MatrixXd& a, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Upper-triangular G with G^T G = A.
Eigen::MatrixXd factorize(const Eigen::MatrixXd& a);

// tr(A At^-1) - log det(A At^-1) - d.
double logdet_div(const Eigen::MatrixXd& a, const Eigen::MatrixXd& a_t);

struct MetricUpdate {
  Eigen::MatrixXd metric;
  double eta = 0.0;     // step actually taken
  int halvings = 0;
  bool accepted = true;  // false when backtracking ran out; metric is then A_t
};

inline constexpr int kMaxEtaHalvings = 20;

// Minimizer of logdet_div(A, A_t) + eta * (u^T A u - v^T A v):
// A^-1 = A_t^-1 + eta (u u^T - v v^T), applied as two Sherman-Morrison
// updates. eta is halved until the result stays positive definite.
MetricUpdate update_metric(const Eigen::MatrixXd& a_t, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& v, double eta);

}  // namespace pronlearn

#endif  // PRONLEARN_METRIC_HPP_
