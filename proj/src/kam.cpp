// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "kamir/kam.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

namespace kamir {

namespace {

void check_frame(int t, int frames, const char *what) {
  if (t < 0 || t >= frames)
    throw std::out_of_range(std::string(what) + ": frame index out of range");
}

// Lazily computed table of squared column distances. row(b)[j] is the
// distance between columns b and j. Queries are processed in ascending
// order, so rows below query-context can be dropped as we advance.
class DistanceTable {
 public:
  DistanceTable(const Eigen::MatrixXd &cols, int context)
      : cols_(cols), context_(context) {}

  // Mean context distance from frame t to every frame.
  Eigen::VectorXd distances_from(int t) {
    const int frames = static_cast<int>(cols_.cols());
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(frames);
    Eigen::VectorXi cnt = Eigen::VectorXi::Zero(frames);
    for (int c = -context_; c <= context_; ++c) {
      if (t + c < 0 || t + c >= frames) continue;
      const Eigen::VectorXd &base = row(t + c);
      const int lo = std::max(0, -c);
      const int hi = std::min(frames, frames - c);
      for (int j = lo; j < hi; ++j) {
        acc[j] += base[j + c];
        cnt[j] += 1;
      }
    }
    for (int j = 0; j < frames; ++j) acc[j] /= cnt[j];  // c = 0 always valid
    return acc;
  }

  void drop_rows_below(int t) {
    rows_.erase(rows_.begin(), rows_.lower_bound(t - context_));
  }

 private:
  const Eigen::VectorXd &row(int b) {
    auto it = rows_.find(b);
    if (it != rows_.end()) return it->second;
    const int frames = static_cast<int>(cols_.cols());
    Eigen::VectorXd r(frames);
    for (int j = 0; j < frames; ++j)
      r[j] = (cols_.col(j) - cols_.col(b)).squaredNorm();
    return rows_.emplace(b, std::move(r)).first->second;
  }

  const Eigen::MatrixXd &cols_;
  int context_;
  std::map<int, Eigen::VectorXd> rows_;
};

bool closer(const Neighbour &a, const Neighbour &b) {
  return a.distance != b.distance ? a.distance < b.distance : a.frame < b.frame;
}

Neighbourhood select_neighbours(int t, const Eigen::VectorXd &dist, int k) {
  const int frames = static_cast<int>(dist.size());
  std::vector<Neighbour> all(static_cast<std::size_t>(frames));
  for (int j = 0; j < frames; ++j) all[static_cast<std::size_t>(j)] = {j, dist[j]};
  std::partial_sort(all.begin(), all.begin() + k, all.end(), closer);
  all.resize(static_cast<std::size_t>(k));

  // The query has distance 0 and must stay selected even when k other
  // zero-distance frames have smaller indices.
  const bool has_query =
      std::any_of(all.begin(), all.end(),
                  [&](const Neighbour &n) { return n.frame == t; });
  if (!has_query) {
    all.back() = {t, 0.0};
    std::sort(all.begin(), all.end(), closer);
  }
  return Neighbourhood{t, std::move(all)};
}

}  // namespace

double context_distance(const MagSpectrogram &x, int t, int t2, int context) {
  if (context < 0)
    throw std::invalid_argument("context_distance: context must be >= 0");
  const int frames = x.num_frames();
  check_frame(t, frames, "context_distance");
  check_frame(t2, frames, "context_distance");
  double acc = 0.0;
  int valid = 0;
  for (int c = -context; c <= context; ++c) {
    if (t + c < 0 || t + c >= frames || t2 + c < 0 || t2 + c >= frames) continue;
    acc += (x.values.col(t + c) - x.values.col(t2 + c)).squaredNorm();
    ++valid;
  }
  return acc / valid;
}

Neighbourhood find_neighbours(const MagSpectrogram &x_smoothed, int t,
                              const KernelConfig &config) {
  const int frames = x_smoothed.num_frames();
  if (config.k < 1) throw std::invalid_argument("find_neighbours: k must be >= 1");
  if (frames < config.k)
    throw std::invalid_argument("find_neighbours: fewer frames than k");
  check_frame(t, frames, "find_neighbours");
  DistanceTable table(x_smoothed.values, config.context);
  return select_neighbours(t, table.distances_from(t), config.k);
}

Eigen::MatrixXd assemble_neighbour_data(const MagSpectrogram &x_bar,
                                        const MagSpectrogram &x_tilde,
                                        const InterferenceIndicator &indicator,
                                        const Neighbourhood &nb,
                                        bool adaptive_substitution) {
  if (x_bar.values.rows() != x_tilde.values.rows() ||
      x_bar.values.cols() != x_tilde.values.cols())
    throw std::invalid_argument("assemble_neighbour_data: shape mismatch");
  if (indicator.size() != x_bar.num_frames())
    throw std::invalid_argument(
        "assemble_neighbour_data: indicator length mismatch");

  Eigen::MatrixXd data(x_bar.values.rows(),
                       static_cast<Eigen::Index>(nb.neighbours.size()));
  for (std::size_t j = 0; j < nb.neighbours.size(); ++j) {
    const int frame = nb.neighbours[j].frame;
    check_frame(frame, x_bar.num_frames(), "assemble_neighbour_data");
    const bool substitute = adaptive_substitution && indicator.active(frame);
    data.col(static_cast<Eigen::Index>(j)) =
        substitute ? x_tilde.values.col(frame) : x_bar.values.col(frame);
  }
  return data;
}

Eigen::VectorXd median_estimate_frame(const Eigen::MatrixXd &neighbour_data) {
  const Eigen::Index k = neighbour_data.cols();
  if (k < 1)
    throw std::invalid_argument("median_estimate_frame: empty input");
  Eigen::VectorXd out(neighbour_data.rows());
  std::vector<double> scratch(static_cast<std::size_t>(k));
  for (Eigen::Index f = 0; f < neighbour_data.rows(); ++f) {
    for (Eigen::Index j = 0; j < k; ++j)
      scratch[static_cast<std::size_t>(j)] = neighbour_data(f, j);
    auto mid = scratch.begin() + k / 2;
    std::nth_element(scratch.begin(), mid, scratch.end());
    if (k % 2 == 1) {
      out[f] = *mid;
    } else {
      const double upper = *mid;
      const double lower = *std::max_element(scratch.begin(), mid);
      out[f] = 0.5 * (lower + upper);
    }
  }
  return out;
}

MagSpectrogram estimate_music(const MagSpectrogram &x_bar,
                              const MagSpectrogram &x_tilde,
                              const InterferenceIndicator &indicator,
                              const KernelConfig &config,
                              std::vector<Neighbourhood> *neighbourhoods) {
  if (x_bar.values.rows() != x_tilde.values.rows() ||
      x_bar.values.cols() != x_tilde.values.cols())
    throw std::invalid_argument("estimate_music: shape mismatch");
  const int frames = x_bar.num_frames();
  if (indicator.size() != frames)
    throw std::invalid_argument("estimate_music: indicator length mismatch");

  std::vector<int> queries;
  for (int t = 0; t < frames; ++t)
    if (!config.filter_only_flagged || indicator.active(t)) queries.push_back(t);

  MagSpectrogram s_bar = x_bar;  // pass-through for unfiltered frames
  if (neighbourhoods) neighbourhoods->clear();
  if (queries.empty()) return s_bar;

  if (config.k < 1) throw std::invalid_argument("estimate_music: k must be >= 1");
  if (frames < config.k)
    throw std::invalid_argument("estimate_music: fewer frames than k");

  const MagSpectrogram search = smooth_frequency(x_tilde, config.sigma);
  DistanceTable table(search.values, config.context);
  for (int t : queries) {
    table.drop_rows_below(t);
    Neighbourhood nb = select_neighbours(t, table.distances_from(t), config.k);
    Eigen::MatrixXd data = assemble_neighbour_data(
        x_bar, x_tilde, indicator, nb, config.adaptive_substitution);
    s_bar.values.col(t) = median_estimate_frame(data);
    if (neighbourhoods) neighbourhoods->push_back(std::move(nb));
  }
  return s_bar;
}

void write_neighbour_csv(const std::string &path,
                         const std::vector<Neighbourhood> &neighbourhoods) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot create neighbour CSV: " + path);
  f << "query_frame,rank,neighbour_frame,distance\n";
  f.precision(17);
  for (const auto &nb : neighbourhoods)
    for (std::size_t j = 0; j < nb.neighbours.size(); ++j)
      f << nb.query_frame << "," << j << "," << nb.neighbours[j].frame << ","
        << nb.neighbours[j].distance << "\n";
}

}  // namespace kamir
