// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef KAMIR_KAM_HPP_
#define KAMIR_KAM_HPP_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "kamir/detection.hpp"
#include "kamir/spectral.hpp"

namespace kamir {

struct KernelConfig {
  int k = 10;                        // neighbours per frame
  int context = 2;                   // temporal extent on each side
  double sigma = 1.0;                // frequency smoothing before the search
  bool adaptive_substitution = true; // flagged neighbours contribute X~ frames
  bool filter_only_flagged = true;   // median-filter only indicated frames
};

struct Neighbour {
  int frame;
  double distance;
};

// K nearest frames of a query, sorted by (distance, frame index).
struct Neighbourhood {
  int query_frame = 0;
  std::vector<Neighbour> neighbours;
};

// Mean squared column distance between frames t and t2 over the context
// offsets c in [-context, context] for which both t+c and t2+c are valid
// frames; averaging keeps edge distances comparable to interior ones.
// context == 0 is the plain squared Euclidean frame distance.
double context_distance(const MagSpectrogram &x, int t, int t2, int context);

// K frames with the smallest context distance to frame t. The query is
// always part of its own neighbourhood (it has distance zero); remaining
// ties are broken toward the smaller frame index. Requires T >= k.
Neighbourhood find_neighbours(const MagSpectrogram &x_smoothed, int t,
                              const KernelConfig &config);

// F x K matrix of neighbour observations for the median: column j is
// X_bar(:, t_j), or X_tilde(:, t_j) when the neighbour is a flagged
// frame and adaptive substitution is on.
Eigen::MatrixXd assemble_neighbour_data(const MagSpectrogram &x_bar,
                                        const MagSpectrogram &x_tilde,
                                        const InterferenceIndicator &indicator,
                                        const Neighbourhood &nb,
                                        bool adaptive_substitution);

// Per-bin median across the K columns; for even K the mean of the two
// middle order statistics.
Eigen::VectorXd median_estimate_frame(const Eigen::MatrixXd &neighbour_data);

// Music magnitude estimate: flagged frames (or every frame when
// filter_only_flagged is off) are replaced by the median over their
// neighbourhood; all other frames pass through from X_bar untouched.
// The similarity search runs on smooth_frequency(x_tilde, sigma); the
// median always consumes unsmoothed columns. If `neighbourhoods` is
// given it receives the per-query neighbour lists.
MagSpectrogram estimate_music(const MagSpectrogram &x_bar,
                              const MagSpectrogram &x_tilde,
                              const InterferenceIndicator &indicator,
                              const KernelConfig &config,
                              std::vector<Neighbourhood> *neighbourhoods = nullptr);

// Debug dump: query_frame,rank,neighbour_frame,distance rows.
void write_neighbour_csv(const std::string &path,
                         const std::vector<Neighbourhood> &neighbourhoods);

}  // namespace kamir

#endif  // KAMIR_KAM_HPP_
