// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <doctest.h>

#include "helpers.hpp"
#include "kamir/nmf.hpp"

using namespace kamir;

TEST_SUITE("nmf") {

TEST_CASE("kl_divergence scalar values") {
  Eigen::MatrixXd a(1, 1), b(1, 1);

  a << 2.0; b << 1.0;
  CHECK(kl_divergence(a, b) ==
        doctest::Approx(2.0 * std::log(2.0) - 2.0 + 1.0).epsilon(1e-12));

  a << 0.0; b << 3.0;
  CHECK(kl_divergence(a, b) == doctest::Approx(3.0).epsilon(1e-12));

  std::mt19937 rng(41);
  const Eigen::MatrixXd m = test::random_nonnegative(rng, 9, 7, 0.1, 2.0);
  CHECK(kl_divergence(m, m) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("kl_divergence is non-negative and rejects shape mismatches") {
  std::mt19937 rng(43);
  for (int i = 0; i < 20; ++i) {
    const Eigen::MatrixXd a = test::random_nonnegative(rng, 6, 8, 0.0, 2.0);
    const Eigen::MatrixXd b = test::random_nonnegative(rng, 6, 8, 0.01, 2.0);
    CHECK(kl_divergence(a, b) >= -1e-12);
  }
  CHECK_THROWS_AS(
      kl_divergence(Eigen::MatrixXd::Ones(2, 2), Eigen::MatrixXd::Ones(2, 3)),
      std::invalid_argument);
}

TEST_CASE("train_dictionary recovers an exact low-rank factorization") {
  std::mt19937 rng(47);
  // R1 distinct positive columns, each repeated 16 times.
  const int rank = 3, bins = 12;
  Eigen::MatrixXd base = test::random_nonnegative(rng, bins, rank, 0.2, 1.0);
  Eigen::MatrixXd x(bins, rank * 16);
  for (int c = 0; c < x.cols(); ++c) x.col(c) = base.col(c % rank);

  std::vector<double> trace;
  NmfOptions opts;
  opts.max_iters = 500;
  opts.rel_tol = 0.0;  // run the full budget
  train_dictionary(test::make_mag(x), rank, 123, opts, &trace);
  REQUIRE_FALSE(trace.empty());
  CHECK(trace.back() < 1e-3);
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i] <= trace[i - 1] + 1e-9);
}

TEST_CASE("train_dictionary solves the exact rank-1 case") {
  std::mt19937 rng(53);
  const Eigen::VectorXd w = test::random_vector(rng, 10, 0.1, 1.0);
  const Eigen::VectorXd h = test::random_vector(rng, 20, 0.1, 1.0);
  const Eigen::MatrixXd x = w * h.transpose();
  std::vector<double> trace;
  NmfOptions opts;
  opts.max_iters = 300;
  train_dictionary(test::make_mag(x), 1, 7, opts, &trace);
  CHECK(trace.back() < 1e-6);
}

TEST_CASE("train_dictionary returns L1-normalized columns") {
  std::mt19937 rng(59);
  const Eigen::MatrixXd x = test::random_nonnegative(rng, 16, 40, 0.0, 1.0);
  const Dictionary dict = train_dictionary(test::make_mag(x), 5, 11);
  REQUIRE(dict.rank() == 5);
  CHECK(dict.templates.minCoeff() >= 0.0);
  for (int r = 0; r < 5; ++r)
    CHECK(dict.templates.col(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("train_dictionary rejects degenerate inputs") {
  const MagSpectrogram zeros = test::make_mag(Eigen::MatrixXd::Zero(4, 8));
  CHECK_THROWS_AS(train_dictionary(zeros, 2, 1), std::invalid_argument);
  std::mt19937 rng(61);
  const MagSpectrogram x = test::make_mag(test::random_nonnegative(rng, 4, 3));
  CHECK_THROWS_AS(train_dictionary(x, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(train_dictionary(x, 5, 1), std::invalid_argument);
}

TEST_CASE("supervised activation update matches the hand trace") {
  // X = [4], W fixed = [2], free rank 0, single sweep:
  // H <- H * (W^T (X / WH)) / (W^T J) = 1 * (2*(4/2)) / 2 = 2.
  Dictionary w;
  w.templates = Eigen::MatrixXd::Constant(1, 1, 2.0);
  MagSpectrogram x = test::make_mag(Eigen::MatrixXd::Constant(1, 1, 4.0));
  NmfOptions opts;
  opts.max_iters = 60;
  opts.rel_tol = 0.0;
  const SemiSupervisedDecomposition dec =
      semi_supervised_factorize(x, w, 0, 1234, opts);
  // The seeded H converges to the exact solution; one update from H=1
  // gives exactly 2, and the fixed point is stable.
  CHECK(dec.w_fixed.templates(0, 0) == 2.0);
  CHECK(dec.h_fixed(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(dec.final_divergence < 1e-9);
}

TEST_CASE("semi-supervised factorization explains dictionary-born data") {
  std::mt19937 rng(67);
  const int bins = 24, rank = 4, frames = 60;
  Dictionary w;
  w.templates = test::random_nonnegative(rng, bins, rank, 0.05, 1.0);
  for (int r = 0; r < rank; ++r) w.templates.col(r) /= w.templates.col(r).sum();
  const Eigen::MatrixXd h = test::random_nonnegative(rng, rank, frames, 0.1, 2.0);
  const MagSpectrogram x = test::make_mag(w.templates * h);

  NmfOptions opts;
  opts.max_iters = 500;
  opts.rel_tol = 0.0;
  const SemiSupervisedDecomposition dec =
      semi_supervised_factorize(x, w, 1, 99, opts);
  CHECK(dec.final_divergence < 1e-3);
  const double free_share = (dec.w_free.templates * dec.h_free).array().sum() /
                            x.values.array().sum();
  CHECK(free_share < 0.05);
  // The fixed dictionary is untouched, bit for bit.
  CHECK((dec.w_fixed.templates.array() == w.templates.array()).all());
}

TEST_CASE("zero frames drive activations to zero scale") {
  std::mt19937 rng(71);
  Dictionary w;
  w.templates = test::random_nonnegative(rng, 8, 2, 0.1, 1.0);
  Eigen::MatrixXd values = test::random_nonnegative(rng, 8, 6, 0.2, 1.0);
  values.rightCols(2).setZero();
  NmfOptions opts;
  opts.max_iters = 200;
  opts.rel_tol = 0.0;
  const SemiSupervisedDecomposition dec =
      semi_supervised_factorize(test::make_mag(values), w, 2, 5, opts);
  const Eigen::MatrixXd recon = dec.reconstruction();
  CHECK(recon.rightCols(2).maxCoeff() < 1e-6);
}

TEST_CASE("factorization descends monotonically on random problems") {
  std::mt19937 rng(73);
  for (int trial = 0; trial < 5; ++trial) {
    const int bins = 10 + trial, frames = 14, rank = 3;
    Dictionary w;
    w.templates = test::random_nonnegative(rng, bins, rank, 0.05, 1.0);
    const MagSpectrogram x =
        test::make_mag(test::random_nonnegative(rng, bins, frames, 0.0, 1.0));
    NmfOptions opts;
    opts.max_iters = 40;
    opts.rel_tol = 0.0;
    const SemiSupervisedDecomposition dec =
        semi_supervised_factorize(x, w, 2, 1000 + trial, opts);
    for (std::size_t i = 1; i < dec.divergence_trace.size(); ++i)
      CHECK(dec.divergence_trace[i] <= dec.divergence_trace[i - 1] + 1e-9);
  }
}

TEST_CASE("identical seeds give identical decompositions") {
  std::mt19937 rng(79);
  Dictionary w;
  w.templates = test::random_nonnegative(rng, 12, 3, 0.1, 1.0);
  const MagSpectrogram x =
      test::make_mag(test::random_nonnegative(rng, 12, 20, 0.0, 1.0));
  NmfOptions opts;
  opts.max_iters = 25;
  const auto a = semi_supervised_factorize(x, w, 2, 2024, opts);
  const auto b = semi_supervised_factorize(x, w, 2, 2024, opts);
  CHECK((a.h_fixed.array() == b.h_fixed.array()).all());
  CHECK((a.w_free.templates.array() == b.w_free.templates.array()).all());
  CHECK((a.h_free.array() == b.h_free.array()).all());
  const auto c = semi_supervised_factorize(x, w, 2, 2025, opts);
  CHECK((a.h_fixed.array() != c.h_fixed.array()).any());
}

TEST_CASE("normalizing dictionary columns keeps the product unchanged") {
  std::mt19937 rng(83);
  Eigen::MatrixXd w = test::random_nonnegative(rng, 9, 4, 0.1, 1.0);
  Eigen::MatrixXd h = test::random_nonnegative(rng, 4, 11, 0.1, 1.0);
  const Eigen::MatrixXd product = w * h;
  for (int r = 0; r < 4; ++r) {
    const double s = w.col(r).sum();
    w.col(r) /= s;
    h.row(r) *= s;
  }
  CHECK(((w * h) - product).cwiseAbs().maxCoeff() <
        1e-12 * product.maxCoeff());
}

TEST_CASE("factorization rejects a dictionary with the wrong bin count") {
  std::mt19937 rng(89);
  Dictionary w;
  w.templates = test::random_nonnegative(rng, 6, 2, 0.1, 1.0);
  const MagSpectrogram x =
      test::make_mag(test::random_nonnegative(rng, 7, 5, 0.0, 1.0));
  CHECK_THROWS_AS(semi_supervised_factorize(x, w, 1, 1), std::invalid_argument);
}

TEST_CASE("matrix container round trip and CSV export") {
  std::mt19937 rng(97);
  const Eigen::MatrixXd m = test::random_nonnegative(rng, 5, 3, -1.0, 1.0);
  const std::string path = "test_matrix.kmx";
  save_matrix(path, m);
  const Eigen::MatrixXd back = load_matrix(path);
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  CHECK((back.array() == m.array()).all());
  std::remove(path.c_str());

  const std::string csv = "test_matrix.csv";
  save_matrix_csv(csv, m);
  std::ifstream f(csv);
  std::string line;
  int rows = 0;
  while (std::getline(f, line)) ++rows;
  CHECK(rows == 5);
  f.close();
  std::remove(csv.c_str());
}

TEST_CASE("load_matrix rejects a corrupt header") {
  const std::string path = "test_bad.kmx";
  {
    std::ofstream f(path, std::ios::binary);
    f << "NOPE 2 2 row-major f64-le\n";
  }
  CHECK_THROWS_AS(load_matrix(path), std::runtime_error);
  std::remove(path.c_str());
}

}  // TEST_SUITE
