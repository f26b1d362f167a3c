// Grid approximations of planar and spatial sets and an estimator of the
// connectivity parameter: the largest ratio of in-set polygonal path length
// to Euclidean distance.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace conclab::func {

// Nodes origin + h * index on a regular grid; a node belongs to the set when
// its mask entry is nonzero.
class GridSet {
 public:
  GridSet(int dimension, std::array<int, 3> shape, Eigen::Vector3d origin, double h,
          std::vector<std::uint8_t> mask);

  // Grid over the box [lo, hi] (first `dimension` coordinates used).
  static GridSet from_predicate(int dimension, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                                double h, const std::function<bool(const Eigen::Vector3d&)>& inside);
  // One row per line of '0'/'1' characters, first line on top; the bottom-left
  // character sits at `origin`.
  static GridSet from_bitmap(const std::string& text, double h,
                             const Eigen::Vector2d& origin = Eigen::Vector2d::Zero());
  static GridSet load_bitmap(const std::string& path, double h,
                             const Eigen::Vector2d& origin = Eigen::Vector2d::Zero());

  int dimension() const { return dimension_; }
  double h() const { return h_; }
  const std::array<int, 3>& shape() const { return shape_; }
  std::size_t node_count() const { return mask_.size(); }
  std::size_t member_count() const;
  bool member(std::size_t node) const { return mask_[node] != 0; }
  bool member(const std::array<int, 3>& cell) const;
  Eigen::Vector3d point(std::size_t node) const;
  std::array<int, 3> cell(std::size_t node) const;
  std::size_t node(const std::array<int, 3>& cell) const;
  bool in_bounds(const std::array<int, 3>& cell) const;
  // Nearest node to p, clamped to the grid.
  std::size_t nearest(const Eigen::Vector3d& p) const;

 private:
  int dimension_;
  std::array<int, 3> shape_;
  Eigen::Vector3d origin_;
  double h_;
  std::vector<std::uint8_t> mask_;
};

// Worst ratio of a straight segment's stencil path length to its length:
// sqrt(4 - 2 sqrt 2) for the 8-neighbour plane stencil and
// sqrt(1 + (sqrt2 - 1)^2 + (sqrt3 - sqrt2)^2) for the 26-neighbour stencil.
double stencil_inflation(int dimension);

struct PathRatio {
  double graph_length = 0.0;   // shortest stencil path
  double pulled_length = 0.0;  // after shortcutting along in-set segments
  double distance = 0.0;
  double ratio = 0.0;  // pulled_length / distance, +inf when unreachable
};

struct ConnectivityEstimate {
  double value = 0.0;
  bool connected = true;
  std::size_t pairs = 0;
  Eigen::Vector3d worst_from = Eigen::Vector3d::Zero();
  Eigen::Vector3d worst_to = Eigen::Vector3d::Zero();
  double stencil_inflation = 1.0;
  double h = 0.0;
};

bool grid_connected(const GridSet& set);

// Ratio for one pair of member nodes.
PathRatio pair_path_ratio(const GridSet& set, std::size_t from, std::size_t to);

// Maximum ratio over sampled member pairs (half of the endpoints drawn from
// boundary nodes); +inf when the mask is disconnected.
ConnectivityEstimate connectivity_param(const GridSet& set, std::size_t pairs, std::uint64_t seed);

}  // namespace conclab::func
