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

#include "pronlearn/metric.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "pronlearn/errors.hpp"

namespace pronlearn {

namespace {

constexpr double kSymmetryTolerance = 1e-9;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

bool is_pd(const Eigen::MatrixXd& a) {
  if (!a.allFinite()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  return llt.info() == Eigen::Success && min_eigenvalue(a) > 0.0;
}

}  // namespace

double symmetry_error(const Eigen::MatrixXd& a) {
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void require_pd(const Eigen::MatrixXd& a, const char* what) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw InvalidArgument(std::string(what) + ": metric must be a non-empty square matrix");
  }
  if (!a.allFinite() || symmetry_error(a) > kSymmetryTolerance) {
    throw NotPositiveDefinite(std::string(what) + ": metric is not symmetric");
  }
  if (Eigen::LLT<Eigen::MatrixXd>(a).info() != Eigen::Success) {
    throw NotPositiveDefinite(std::string(what) + ": metric is not positive definite");
  }
}

double mahalanobis(const Eigen::MatrixXd& a, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != a.rows() || y.size() != a.rows()) {
    throw InvalidArgument("mahalanobis: dimension mismatch");
  }
  require_pd(a, "mahalanobis");
  const Eigen::VectorXd d = x - y;
  return std::max(0.0, d.dot(a * d));
}

Eigen::MatrixXd factorize(const Eigen::MatrixXd& a) {
  require_pd(a, "factorize");
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  return llt.matrixU();
}

double logdet_div(const Eigen::MatrixXd& a, const Eigen::MatrixXd& a_t) {
  if (a.rows() != a_t.rows()) throw InvalidArgument("logdet_div: dimension mismatch");
  require_pd(a, "logdet_div");
  require_pd(a_t, "logdet_div");
  const Eigen::LLT<Eigen::MatrixXd> llt_t(a_t);
  const Eigen::MatrixXd prod = llt_t.solve(a);  // A_t^-1 A, same trace and determinant
  const Eigen::LLT<Eigen::MatrixXd> llt_a(a);
  const double logdet_a = 2.0 * llt_a.matrixLLT().diagonal().array().log().sum();
  const double logdet_t = 2.0 * llt_t.matrixLLT().diagonal().array().log().sum();
  const double d = static_cast<double>(a.rows());
  return std::max(0.0, prod.trace() - (logdet_a - logdet_t) - d);
}

MetricUpdate update_metric(const Eigen::MatrixXd& a_t, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& v, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("update_metric: eta must be > 0");
  if (u.size() != a_t.rows() || v.size() != a_t.rows()) {
    throw InvalidArgument("update_metric: dimension mismatch");
  }
  if (!u.allFinite() || !v.allFinite()) throw NumericError("update_metric: non-finite direction");
  require_pd(a_t, "update_metric");

  MetricUpdate out;
  out.metric = a_t;
  if (u == v) {
    out.eta = eta;
    return out;
  }

  const Eigen::VectorXd au = a_t * u;
  const Eigen::MatrixXd a1 = a_t - (eta * au) * au.transpose() / (1.0 + eta * u.dot(au));
  for (int halvings = 0; halvings <= kMaxEtaHalvings; ++halvings) {
    const double step = eta * std::ldexp(1.0, -halvings);
    // Adding step * u u^T to the inverse only shrinks A, so the first update
    // is PD for any step; recompute it when step changed.
    const Eigen::MatrixXd first =
        halvings == 0 ? a1 : Eigen::MatrixXd(a_t - (step * au) * au.transpose() / (1.0 + step * u.dot(au)));
    const Eigen::VectorXd fv = first * v;
    const double denom = 1.0 - step * v.dot(fv);
    if (denom > 0.0) {
      Eigen::MatrixXd next = symmetrized(first + (step * fv) * fv.transpose() / denom);
      if (is_pd(next)) {
        out.metric = std::move(next);
        out.eta = step;
        out.halvings = halvings;
        return out;
      }
    }
  }
  out.accepted = false;
  out.eta = 0.0;
  out.halvings = kMaxEtaHalvings;
  return out;
}

}  // namespace pronlearn
