// Copyright 2026 The sdci Authors.
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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include <sdci/dci.hpp>
#include <sdci/errors.hpp>
#include <sdci/qoi.hpp>

namespace sdci {
namespace {

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double mean = 0.0, double sd = 1.0) {
  std::mt19937_64 g{seed};
  std::normal_distribution<double> nd{mean, sd};
  Eigen::MatrixXd p(n, d);
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = nd(g);
  return p;
}

TEST(ObservedDensity, StandardNormalAndDiagonal) {
  const ObservedDensity<double> std_normal{StandardNormalProduct{2}};
  EXPECT_NEAR(std_normal(Eigen::Vector2d(0.0, 0.0)), 1.0 / (2.0 * std::numbers::pi), 1e-15);
  const ObservedDensity<double> diag{DiagonalGaussian<double>{Eigen::VectorXd::Constant(1, 2.0),
                                                              Eigen::VectorXd::Constant(1, 4.0)}};
  EXPECT_NEAR(diag(Eigen::VectorXd::Constant(1, 4.0)), std::exp(-0.5) / std::sqrt(8.0 * std::numbers::pi), 1e-15);
  EXPECT_THROW((void)std_normal(Eigen::VectorXd::Zero(3)), DimensionMismatch);
}

TEST(ObservedDensity, GridInterpolatesLinearly) {
  Eigen::VectorXd axis(3);
  axis << 0.0, 1.0, 2.0;
  Eigen::VectorXd values(3);
  values << 0.0, 1.0, 0.0;
  const ObservedDensity<double> grid{GridDensity<double>{{axis}, values}};
  EXPECT_DOUBLE_EQ(grid(Eigen::VectorXd::Constant(1, 0.5)), 0.5);
  EXPECT_DOUBLE_EQ(grid(Eigen::VectorXd::Constant(1, 1.0)), 1.0);
  EXPECT_DOUBLE_EQ(grid(Eigen::VectorXd::Constant(1, 2.5)), 0.0);
  Eigen::VectorXd bad(2);
  bad << 1.0, 0.0;
  EXPECT_THROW((ObservedDensity<double>{GridDensity<double>{{bad}, Eigen::VectorXd::Ones(2)}}), std::invalid_argument);
}

TEST(Wdci, MatchedObservationGivesUnitRatio) {
  const Eigen::MatrixXd q = gaussian(4000, 1, 1);
  const auto r = wdci(q, Eigen::VectorXd::Ones(4000), ObservedDensity<double>{StandardNormalProduct{1}});
  EXPECT_NEAR(r.expected_ratio, 1.0, 0.05);
  EXPECT_LT(r.kl_dci, 0.03);
  EXPECT_GE(r.kl_dci, 0.0);
}

TEST(Wdci, ShiftedObservationKl) {
  // KL(N(1,1) || N(0,1)) = 1/2.
  const Eigen::MatrixXd q = gaussian(4000, 1, 2);
  const ObservedDensity<double> obs{
      DiagonalGaussian<double>{Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 1.0)}};
  const auto r = wdci(q, Eigen::VectorXd::Ones(4000), obs);
  EXPECT_NEAR(r.kl_dci, 0.5, 0.1);
  EXPECT_NEAR(r.expected_ratio, 1.0, 0.1);
}

TEST(Wdci, WeightScaleDoesNotMatter) {
  const Eigen::MatrixXd q = gaussian(500, 2, 3);
  Eigen::VectorXd w = (gaussian(500, 1, 4).array().abs() + 0.1).matrix();
  const ObservedDensity<double> obs{StandardNormalProduct{2}};
  const auto a = wdci(q, w, obs);
  const auto b = wdci(q, Eigen::VectorXd(w * 1e3), obs);
  EXPECT_NEAR(a.expected_ratio, b.expected_ratio, 1e-12);
  EXPECT_NEAR(a.kl_dci_raw, b.kl_dci_raw, 1e-12);
  EXPECT_TRUE(a.ratios.isApprox(b.ratios, 1e-12));
  EXPECT_NEAR(a.weight_scale * w.sum(), 500.0, 1e-9);
}

TEST(Wdci, RejectsBadInput) {
  const ObservedDensity<double> obs{StandardNormalProduct{1}};
  EXPECT_THROW((void)wdci(gaussian(5, 1, 1), Eigen::VectorXd::Ones(5), obs), std::invalid_argument);
  EXPECT_THROW((void)wdci(gaussian(20, 1, 1), Eigen::VectorXd::Ones(19), obs), DimensionMismatch);
  EXPECT_THROW((void)wdci(gaussian(20, 2, 1), Eigen::VectorXd::Ones(20), obs), DimensionMismatch);
}

TEST(Residuals, ScaledDifferences) {
  Eigen::MatrixXd sim(2, 2);
  sim << 1.0, 2.0, 3.0, 6.0;
  const auto x = residual_matrix(sim, Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(0.5, 2.0));
  Eigen::MatrixXd expected(2, 2);
  expected << 0.0, 0.0, 4.0, 2.0;
  EXPECT_TRUE(x.values.isApprox(expected));
  EXPECT_THROW((void)residual_matrix(sim, Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(0.0, 1.0)), InvalidNoiseModel);
  EXPECT_THROW((void)residual_matrix(sim, Eigen::Vector3d(1.0, 2.0, 3.0), Eigen::Vector2d(1.0, 1.0)),
               DimensionMismatch);
}

TEST(Qpca, OrthonormalComponentsWithSignConvention) {
  const ResidualMatrix<double> x{gaussian(200, 6, 5) * gaussian(6, 6, 6)};
  const auto map = learn_qpca(x, 3);
  EXPECT_TRUE((map.components * map.components.transpose()).isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-12));
  for (Eigen::Index l = 0; l < 3; ++l) {
    Eigen::Index j = 0;
    map.components.row(l).cwiseAbs().maxCoeff(&j);
    EXPECT_GT(map.components(l, j), 0.0);
  }
  EXPECT_GE(map.explained_variance(0), map.explained_variance(1));
  EXPECT_GE(map.explained_variance(1), map.explained_variance(2));
  // Variance of the projected QoI equals the explained variance.
  const Eigen::MatrixXd qoi = apply_qpca(map, x);
  const Eigen::RowVectorXd mean = qoi.colwise().mean();
  const double var0 = (qoi.col(0).array() - mean(0)).square().sum() / 199.0;
  EXPECT_NEAR(var0, map.explained_variance(0), 1e-10 * var0);
}

TEST(Qpca, RankDeficiency) {
  const ResidualMatrix<double> few{gaussian(3, 10, 1)};
  EXPECT_THROW((void)learn_qpca(few, 3), RankDeficient);
  Eigen::MatrixXd rank_one = gaussian(50, 1, 2) * Eigen::RowVectorXd::Ones(4);
  EXPECT_THROW((void)learn_qpca(ResidualMatrix<double>{rank_one}, 2), RankDeficient);
  EXPECT_NO_THROW((void)learn_qpca(ResidualMatrix<double>{rank_one}, 1));
}

TEST(Mud, ArgmaxPrefersFirstOnTies) {
  EXPECT_EQ(argmax_updated(Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(2, 2, 1)), 0);
  EXPECT_EQ(argmax_updated(Eigen::Vector3d(1, 3, 1), Eigen::Vector3d(2, 1, 1)), 1);
}

TEST(Mud, ColumnPermutationLeavesPointUnchanged) {
  const Eigen::MatrixXd lambda = gaussian(500, 2, 8);
  const Eigen::MatrixXd A = gaussian(6, 2, 9);
  const Eigen::MatrixXd sim = lambda * A.transpose();
  const Eigen::VectorXd truth = Eigen::Vector2d(0.3, -0.2);
  const Eigen::VectorXd data = A * truth + 0.1 * gaussian(6, 1, 10);
  const Eigen::VectorXd sigma = Eigen::VectorXd::Constant(6, 0.1);
  const auto base = mud_estimate(data, sigma, lambda, Eigen::VectorXd::Ones(500), sim, 2);
  std::vector<int> order(6);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937 g{3};
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(order.begin(), order.end(), g);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
    for (int j = 0; j < 6; ++j) perm.indices()(j) = order[static_cast<std::size_t>(j)];
    const Eigen::MatrixXd sim_p = sim * perm;
    const Eigen::VectorXd data_p = perm.transpose() * data;
    const auto permuted = mud_estimate(data_p, sigma, lambda, Eigen::VectorXd::Ones(500), sim_p, 2);
    EXPECT_EQ(permuted.mud_index, base.mud_index);
    EXPECT_EQ(permuted.mud_point, base.mud_point);
  }
}

LinearGaussianProblem<double> problem(const Eigen::MatrixXd& A, std::uint64_t seed) {
  const Eigen::Index p = A.cols();
  const Eigen::MatrixXd L = gaussian(p, p, seed);
  return {A, gaussian(A.rows(), 1, seed + 1), gaussian(p, 1, seed + 2),
          L * L.transpose() + Eigen::MatrixXd::Identity(p, p), 0.25 * Eigen::MatrixXd::Identity(A.rows(), A.rows())};
}

TEST(LinearGaussian, ScalarClosedForm) {
  // One parameter, one observation: the MUD point solves a * lambda + b = 0 exactly.
  LinearGaussianProblem<double> lg{Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Constant(1, -3.0),
                                   Eigen::VectorXd::Constant(1, 7.0), Eigen::MatrixXd::Constant(1, 1, 5.0),
                                   Eigen::MatrixXd::Constant(1, 1, 0.4)};
  const auto s = linear_gaussian_mud(lg);
  EXPECT_NEAR(s.mud_point(0), 1.5, 1e-14);
  // Sigma_up = s0 - s0^2 a^2 (a^2 s0 - so) / (a^2 s0)^2 = so / a^2.
  EXPECT_NEAR(s.updated_cov(0, 0), 0.1, 1e-14);
}

TEST(LinearGaussian, MatchedCovariancesKeepInitial) {
  auto lg = problem(gaussian(2, 3, 20), 21);
  lg.sigma_obs = lg.A * lg.sigma_init * lg.A.transpose();
  const auto s = linear_gaussian_mud(lg);
  EXPECT_LT((s.updated_cov - lg.sigma_init).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LinearGaussian, SquareOrthogonalIgnoresInitial) {
  const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(3, 3, 30)).householderQ();
  auto a = problem(Q, 31);
  auto b = problem(Q, 41);
  b.b = a.b;
  b.sigma_obs = a.sigma_obs;
  const auto sa = linear_gaussian_mud(a);
  const auto sb = linear_gaussian_mud(b);
  EXPECT_LT((sa.mud_point - sb.mud_point).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((sa.updated_cov - sb.updated_cov).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((sa.mud_point + Q.transpose() * a.b).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((sa.updated_cov - Q.transpose() * a.sigma_obs * Q).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LinearGaussian, SingularPrediction) {
  Eigen::MatrixXd A(2, 2);
  A << 1.0, 2.0, 2.0, 4.0;
  EXPECT_THROW((void)linear_gaussian_mud(problem(A, 5)), SingularPrediction);
}

}  // namespace
}  // namespace sdci
