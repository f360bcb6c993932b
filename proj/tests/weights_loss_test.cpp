#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "confeval/text_format.hpp"
#include "confeval/weights_loss.hpp"

using namespace confeval;

namespace {

// Naive long-double evaluation straight from the definition.
long double oracle_loss(const Matrix<double>& z, const LabelMatrix& y, const std::vector<double>& w,
                        bool per_term = false) {
  long double sum = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const long double s = 1.0L / (1.0L + std::exp(-static_cast<long double>(z(i, j))));
      const long double yy = y(i, j) ? 1.0L : 0.0L;
      sum -= w[static_cast<std::size_t>(j)] * yy * std::log(s) + (1.0L - yy) * std::log(1.0L - s);
    }
  }
  return sum / (per_term ? z.rows() * z.cols() : z.rows());
}

Matrix<double> fixture_z() {
  Matrix<double> z(2, 3);
  z << 0.5, -1.0, 2.0, -0.3, 0.0, 1.5;
  return z;
}

LabelMatrix fixture_y() {
  LabelMatrix y(2, 3);
  y << true, false, true, false, true, false;
  return y;
}

}  // namespace

TEST(ClassWeights, PrintedTrainingWeights) {
  // Index order; N is the training event count.
  const std::vector<std::int64_t> counts = {18575, 43425, 83710, 613, 948, 10789, 11111, 938, 6485};
  const std::vector<std::string> expected = {"9.19", "3.93", "2.04", "277.89", "179.79",
                                             "15.81", "15.35", "181.71", "26.31"};
  const auto cw = compute_class_weights(counts, 170623);
  for (std::size_t j = 0; j < 9; ++j) {
    EXPECT_EQ(fixed(cw.w(static_cast<Eigen::Index>(j)), 2), expected[j]);
  }
}

TEST(ClassWeights, ExactRationalAndMonotone) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 1000000);
    std::vector<std::int64_t> counts(9);
    for (auto& c : counts) c = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n));
    const auto cw = compute_class_weights(counts, n);
    for (std::size_t a = 0; a < 9; ++a) {
      EXPECT_NEAR(cw.w(static_cast<Eigen::Index>(a)), static_cast<double>(n) / (counts[a] + 1), 1e-12 * cw.w(static_cast<Eigen::Index>(a)));
      for (std::size_t b = 0; b < 9; ++b) {
        if (counts[a] < counts[b]) {
          EXPECT_GT(cw.w(static_cast<Eigen::Index>(a)), cw.w(static_cast<Eigen::Index>(b)));
        }
      }
    }
  }
  const std::vector<std::int64_t> one = {99};
  EXPECT_EQ(compute_class_weights(one, 100).w(0), 1.0);
  EXPECT_THROW(compute_class_weights(one, 0), std::invalid_argument);
}

TEST(Sigmoid, KnownValuesAndSymmetry) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(2.0), 0.88079707797788244, 1e-12);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-700, 700);
  for (int i = 0; i < 1000; ++i) {
    const double z = u(rng);
    const double s = sigmoid(z);
    EXPECT_TRUE(std::isfinite(s));
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_NEAR(s + sigmoid(-z), 1.0, 1e-15);
  }
  EXPECT_GT(sigmoid(-700.0), 0.0);
  EXPECT_GT(sigmoid(-700.0f), -1.0f);  // float instantiation compiles and stays finite
}

TEST(BceLoss, HandOracleTwoByThree) {
  const auto z = fixture_z();
  const auto y = fixture_y();
  EXPECT_NEAR(bce_loss(z, y).value, static_cast<double>(oracle_loss(z, y, {1, 1, 1})), 1e-9);
  EXPECT_NEAR(weighted_bce_loss(z, y, Eigen::Vector3d(2, 5, 1)).value,
              static_cast<double>(oracle_loss(z, y, {2, 5, 1})), 1e-9);
  EXPECT_NEAR(bce_loss(z, y, Normalization::kPerTerm).value,
              static_cast<double>(oracle_loss(z, y, {1, 1, 1}, true)), 1e-9);
  EXPECT_EQ(bce_loss(z, y).n_events, 2);
}

TEST(BceLoss, BoundaryValues) {
  const Matrix<double> zeros = Matrix<double>::Zero(1, 9);
  const LabelMatrix any = LabelMatrix::Constant(1, 9, true);
  EXPECT_NEAR(bce_loss(zeros, any).value, 9 * std::log(2.0), 1e-12);
  const Matrix<double> confident = Matrix<double>::Constant(1, 9, 50.0);
  EXPECT_LT(bce_loss(confident, any).value, 1e-20);
  Matrix<double> sixty(2, 9);
  sixty.row(0).setConstant(60.0);
  sixty.row(1).setConstant(-60.0);
  LabelMatrix y(2, 9);
  y.row(0).setConstant(true);
  y.row(1).setConstant(false);
  const double v = bce_loss(sixty, y).value;
  EXPECT_GE(v, 0.0);
  EXPECT_LT(v, 1e-15);
  const Matrix<double> huge = Matrix<double>::Constant(1, 9, 700.0);
  EXPECT_TRUE(std::isfinite(bce_loss(huge, LabelMatrix::Constant(1, 9, false)).value));
}

TEST(BceLoss, UnitWeightsReduceToPlain) {
  std::mt19937 rng(9);
  std::normal_distribution<double> n(0, 4);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix<double> z(5, 9);
    LabelMatrix y(5, 9);
    for (Eigen::Index i = 0; i < 5; ++i) {
      for (Eigen::Index j = 0; j < 9; ++j) {
        z(i, j) = n(rng);
        y(i, j) = rng() % 2;
      }
    }
    const double plain = bce_loss(z, y).value;
    EXPECT_NEAR(weighted_bce_loss(z, y, Vector<double>::Ones(9)).value, plain, 1e-12);
    EXPECT_GE(plain, 0.0);
    // All-negative labels: weights cannot matter.
    const LabelMatrix none = LabelMatrix::Constant(5, 9, false);
    EXPECT_NEAR(weighted_bce_loss(z, none, Vector<double>::Constant(9, 7.0)).value, bce_loss(z, none).value, 1e-12);
  }
}

TEST(BceLoss, ShapeAndWeightErrors) {
  const auto z = fixture_z();
  EXPECT_THROW(bce_loss(z, LabelMatrix::Constant(2, 2, false)), std::invalid_argument);
  EXPECT_THROW(weighted_bce_loss(z, fixture_y(), Eigen::Vector2d(1, 1)), std::invalid_argument);
  EXPECT_THROW(weighted_bce_loss(z, fixture_y(), Eigen::Vector3d(1, 0, 1)), std::invalid_argument);
}

TEST(BceGradient, CentralDifferences) {
  std::mt19937 rng(21);
  std::normal_distribution<double> n(0, 2);
  std::uniform_real_distribution<double> wd(0.5, 300);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix<double> z(3, 9);
    LabelMatrix y(3, 9);
    Vector<double> w(9);
    for (Eigen::Index j = 0; j < 9; ++j) w(j) = wd(rng);
    for (Eigen::Index i = 0; i < 3; ++i) {
      for (Eigen::Index j = 0; j < 9; ++j) {
        z(i, j) = n(rng);
        y(i, j) = rng() % 2;
      }
    }
    const auto g = weighted_bce_gradient(z, y, w);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < 3; ++i) {
      for (Eigen::Index j = 0; j < 9; ++j) {
        Matrix<double> zp = z, zm = z;
        zp(i, j) += h;
        zm(i, j) -= h;
        const double fd = (weighted_bce_loss(zp, y, w).value - weighted_bce_loss(zm, y, w).value) / (2 * h);
        EXPECT_LE(std::abs(fd - g(i, j)), 1e-6 * std::max(1.0, std::abs(g(i, j))))
            << "trial " << trial << " at " << i << "," << j;
      }
    }
  }
}

TEST(Threshold, InclusiveBoundaryAndBruteForce) {
  Matrix<double> p = Matrix<double>::Zero(1, 9);
  p(0, 0) = 0.9;
  p(0, 1) = 0.5;
  p(0, 2) = 0.1;
  const auto t = threshold_predictions(p, 0.5);
  EXPECT_TRUE(t(0, 0));
  EXPECT_TRUE(t(0, 1));
  EXPECT_EQ(t.count(), 2);
  EXPECT_EQ(threshold_predictions(Matrix<double>::Constant(1, 9, 0.9), 0.999).count(), 0);

  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  Matrix<double> r(5, 9);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = u(rng);
  for (double tau : {0.1, 0.5, 0.73}) {
    const auto got = threshold_predictions(r, tau);
    for (Eigen::Index i = 0; i < 5; ++i) {
      for (Eigen::Index j = 0; j < 9; ++j) {
        EXPECT_EQ(got(i, j), r(i, j) >= tau);
      }
    }
  }
  EXPECT_THROW(threshold_predictions(r, 0.0), std::invalid_argument);
  EXPECT_THROW(threshold_predictions(r, 1.0), std::invalid_argument);
}
