// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef KAMIR_NMF_HPP_
#define KAMIR_NMF_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kamir/spectral.hpp"

namespace kamir {

// Spectral template dictionary. Columns are L1-normalized after
// training (the scale is folded into the activations).
struct Dictionary {
  Eigen::MatrixXd templates;  // F x R, entries >= 0

  int rank() const { return static_cast<int>(templates.cols()); }
  int num_bins() const { return static_cast<int>(templates.rows()); }
};

struct NmfOptions {
  int max_iters = 200;
  // Early stop once the relative divergence improvement over `patience`
  // sweeps falls below rel_tol. rel_tol <= 0 disables the early stop.
  double rel_tol = 1e-5;
  int patience = 10;
};

// Generalized Kullback-Leibler divergence
//   sum_{f,t} a*ln(a/b) - a + b
// with 0*ln(0/b) = 0 and b floored at 1e-12 inside the log.
double kl_divergence(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b);

// Multiplicative-update KL NMF of the exemplar spectrogram; returns the
// template matrix with L1-normalized columns. Initialization is seeded
// uniform on (0,1]. If `trace` is given, it receives the divergence
// after every sweep.
Dictionary train_dictionary(const MagSpectrogram &exemplars, int rank,
                            std::uint64_t seed, const NmfOptions &opts = {},
                            std::vector<double> *trace = nullptr);

struct SemiSupervisedDecomposition {
  Dictionary w_fixed;        // untouched copy of the input dictionary
  Eigen::MatrixXd h_fixed;   // R1 x T
  Dictionary w_free;         // F x RS, learned from the mixture
  Eigen::MatrixXd h_free;    // RS x T
  double final_divergence = 0.0;
  std::vector<double> divergence_trace;  // one entry per sweep

  // NMF approximation of the music magnitude (the free part).
  Eigen::MatrixXd music_estimate() const {
    return w_free.templates * h_free;
  }
  Eigen::MatrixXd reconstruction() const {
    return w_fixed.templates * h_fixed + w_free.templates * h_free;
  }
};

// Factorizes x as W_N H_N + W_S H_S with W_N held fixed. Per sweep the
// order is H_N, H_S, W_S, with the ratio X/(W_N H_N + W_S H_S)
// recomputed before each factor update. free_rank == 0 degenerates to
// fully supervised activation estimation.
SemiSupervisedDecomposition semi_supervised_factorize(
    const MagSpectrogram &x, const Dictionary &w_fixed, int free_rank,
    std::uint64_t seed, const NmfOptions &opts = {});

// Matrix container: one text header line
//   KMX1 <rows> <cols> row-major f64-le\n
// followed by the payload as little-endian doubles in row-major order.
void save_matrix(const std::string &path, const Eigen::MatrixXd &m);
Eigen::MatrixXd load_matrix(const std::string &path);
void save_matrix_csv(const std::string &path, const Eigen::MatrixXd &m);

void save_dictionary(const std::string &path, const Dictionary &dict);
Dictionary load_dictionary(const std::string &path);

}  // namespace kamir

#endif  // KAMIR_NMF_HPP_
