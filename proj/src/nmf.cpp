// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "kamir/nmf.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace kamir {

namespace {

constexpr double kEpsilon = 1e-12;

// Seeded uniform draw on (0,1]. Built from raw mt19937_64 output so the
// stream does not depend on the standard library's distribution
// implementation.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : gen_(seed) {}
  double next() {
    const double u = static_cast<double>(gen_() >> 11) * 0x1p-53;  // [0,1)
    return 1.0 - u;                                                // (0,1]
  }
  void fill(Eigen::MatrixXd &m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = next();
  }

 private:
  std::mt19937_64 gen_;
};

void check_nonnegative(const Eigen::MatrixXd &m, const char *what) {
  if (m.size() > 0 && m.minCoeff() < 0.0)
    throw std::invalid_argument(std::string(what) +
                                ": negative entries are not allowed");
}

Eigen::MatrixXd ratio(const Eigen::MatrixXd &x, const Eigen::MatrixXd &v) {
  return x.array() / v.array().max(kEpsilon);
}

// H <- H .* (W^T R) ./ (W^T J), with J all ones: the denominator row r is
// the column sum of W.
void update_activations(const Eigen::MatrixXd &w, const Eigen::MatrixXd &r,
                        Eigen::MatrixXd &h) {
  Eigen::VectorXd colsum = w.colwise().sum();
  Eigen::VectorXd inv = colsum.array().max(kEpsilon).inverse();
  h = (inv.asDiagonal() * (w.transpose() * r)).cwiseProduct(h);
}

// W <- W .* (R H^T) ./ (J H^T): the denominator column r is the row sum
// of H.
void update_templates(const Eigen::MatrixXd &h, const Eigen::MatrixXd &r,
                      Eigen::MatrixXd &w) {
  Eigen::VectorXd rowsum = h.rowwise().sum();
  Eigen::VectorXd inv = rowsum.array().max(kEpsilon).inverse();
  w = ((r * h.transpose()) * inv.asDiagonal()).cwiseProduct(w);
}

bool should_stop(const std::vector<double> &trace, const NmfOptions &opts) {
  if (opts.rel_tol <= 0.0) return false;
  const int n = static_cast<int>(trace.size());
  if (n <= opts.patience) return false;
  const double before = trace[n - 1 - opts.patience];
  const double now = trace[n - 1];
  if (before <= 0.0) return true;
  return (before - now) / before < opts.rel_tol;
}

}  // namespace

double kl_divergence(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("kl_divergence: shape mismatch");
  double acc = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      const double av = a(r, c);
      const double bv = b(r, c);
      if (av > 0.0)
        acc += av * std::log(av / std::max(bv, kEpsilon)) - av + bv;
      else
        acc += bv;
    }
  }
  return acc;
}

Dictionary train_dictionary(const MagSpectrogram &exemplars, int rank,
                            std::uint64_t seed, const NmfOptions &opts,
                            std::vector<double> *trace) {
  const Eigen::MatrixXd &x = exemplars.values;
  if (rank < 1) throw std::invalid_argument("train_dictionary: rank must be >= 1");
  if (x.cols() < rank)
    throw std::invalid_argument("train_dictionary: fewer frames than rank");
  check_nonnegative(x, "train_dictionary");
  if (x.maxCoeff() <= 0.0)
    throw std::invalid_argument("train_dictionary: all-zero input");

  UniformSource rng(seed);
  Eigen::MatrixXd w(x.rows(), rank), h(rank, x.cols());
  rng.fill(w);
  rng.fill(h);

  std::vector<double> local_trace;
  std::vector<double> &div = trace ? *trace : local_trace;
  div.clear();
  for (int it = 0; it < opts.max_iters; ++it) {
    update_activations(w, ratio(x, w * h), h);
    update_templates(h, ratio(x, w * h), w);
    div.push_back(kl_divergence(x, w * h));
    if (should_stop(div, opts)) break;
  }

  // Fold column scales into H so templates are L1-normalized.
  Dictionary dict;
  dict.templates = w;
  for (int r = 0; r < rank; ++r) {
    const double s = dict.templates.col(r).sum();
    if (s <= 0.0)
      throw std::runtime_error("train_dictionary: degenerate all-zero template");
    dict.templates.col(r) /= s;
  }
  return dict;
}

SemiSupervisedDecomposition semi_supervised_factorize(const MagSpectrogram &x,
                                                      const Dictionary &w_fixed,
                                                      int free_rank,
                                                      std::uint64_t seed,
                                                      const NmfOptions &opts) {
  const Eigen::MatrixXd &v = x.values;
  if (w_fixed.templates.rows() != v.rows())
    throw std::invalid_argument(
        "semi_supervised_factorize: dictionary row count does not match "
        "spectrogram bins");
  if (free_rank < 0)
    throw std::invalid_argument("semi_supervised_factorize: free_rank < 0");
  check_nonnegative(v, "semi_supervised_factorize");
  check_nonnegative(w_fixed.templates, "semi_supervised_factorize dictionary");

  const Eigen::Index frames = v.cols();
  const Eigen::Index bins = v.rows();
  const int r1 = w_fixed.rank();

  UniformSource rng(seed);
  SemiSupervisedDecomposition out;
  out.w_fixed = w_fixed;
  out.h_fixed.resize(r1, frames);
  rng.fill(out.h_fixed);
  out.w_free.templates.resize(bins, free_rank);
  rng.fill(out.w_free.templates);
  out.h_free.resize(free_rank, frames);
  rng.fill(out.h_free);
  // Start the free part on the same footing as a trained dictionary
  // (L1-normalized templates) and with small activations, so the fixed
  // templates lead the explanation of whatever they can cover.
  for (int r = 0; r < free_rank; ++r)
    out.w_free.templates.col(r) /= out.w_free.templates.col(r).sum();
  out.h_free *= 0.1;

  const Eigen::MatrixXd &wn = out.w_fixed.templates;
  Eigen::MatrixXd &hn = out.h_fixed;
  Eigen::MatrixXd &ws = out.w_free.templates;
  Eigen::MatrixXd &hs = out.h_free;

  auto model = [&]() -> Eigen::MatrixXd {
    Eigen::MatrixXd m = wn * hn;
    if (free_rank > 0) m += ws * hs;
    return m;
  };

  for (int it = 0; it < opts.max_iters; ++it) {
    update_activations(wn, ratio(v, model()), hn);
    if (free_rank > 0) {
      update_activations(ws, ratio(v, model()), hs);
      update_templates(hs, ratio(v, model()), ws);
    }
    out.divergence_trace.push_back(kl_divergence(v, model()));
    if (should_stop(out.divergence_trace, opts)) break;
  }
  out.final_divergence = out.divergence_trace.empty()
                             ? kl_divergence(v, model())
                             : out.divergence_trace.back();
  // Restore the dictionary invariant on the learned templates; the
  // product W_S H_S is unchanged.
  for (int r = 0; r < free_rank; ++r) {
    const double s = ws.col(r).sum();
    if (s > 0.0) {
      ws.col(r) /= s;
      hs.row(r) *= s;
    }
  }
  return out;
}

namespace {

void write_doubles_le(std::ostream &os, const double *data, std::size_t n) {
  static_assert(sizeof(double) == 8);
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char *>(data),
             static_cast<std::streamsize>(n * 8));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t u;
      std::memcpy(&u, data + i, 8);
      char b[8];
      for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((u >> (8 * k)) & 0xff);
      os.write(b, 8);
    }
  }
}

void read_doubles_le(std::istream &is, double *data, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char *>(data), static_cast<std::streamsize>(n * 8));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      unsigned char b[8];
      is.read(reinterpret_cast<char *>(b), 8);
      std::uint64_t u = 0;
      for (int k = 0; k < 8; ++k) u |= static_cast<std::uint64_t>(b[k]) << (8 * k);
      std::memcpy(data + i, &u, 8);
    }
  }
}

}  // namespace

void save_matrix(const std::string &path, const Eigen::MatrixXd &m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot create matrix file: " + path);
  f << "KMX1 " << m.rows() << " " << m.cols() << " row-major f64-le\n";
  std::vector<double> row(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row[static_cast<std::size_t>(c)] = m(r, c);
    write_doubles_le(f, row.data(), row.size());
  }
  if (!f) throw std::runtime_error("failed writing matrix file: " + path);
}

Eigen::MatrixXd load_matrix(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open matrix file: " + path);
  std::string header;
  std::getline(f, header);
  std::istringstream hs(header);
  std::string magic, order, fmt;
  Eigen::Index rows = 0, cols = 0;
  hs >> magic >> rows >> cols >> order >> fmt;
  if (magic != "KMX1" || order != "row-major" || fmt != "f64-le" || rows < 0 ||
      cols < 0)
    throw std::runtime_error("bad matrix container header in " + path);
  Eigen::MatrixXd m(rows, cols);
  std::vector<double> row(static_cast<std::size_t>(cols));
  for (Eigen::Index r = 0; r < rows; ++r) {
    read_doubles_le(f, row.data(), row.size());
    if (!f) throw std::runtime_error("truncated matrix payload in " + path);
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

void save_matrix_csv(const std::string &path, const Eigen::MatrixXd &m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot create CSV file: " + path);
  f.precision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) f << ",";
      f << m(r, c);
    }
    f << "\n";
  }
}

void save_dictionary(const std::string &path, const Dictionary &dict) {
  save_matrix(path, dict.templates);
}

Dictionary load_dictionary(const std::string &path) {
  Dictionary d;
  d.templates = load_matrix(path);
  check_nonnegative(d.templates, "load_dictionary");
  return d;
}

}  // namespace kamir
