#include "conclab/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include "conclab/numerics.hpp"
#include "conclab/parallel.hpp"
#include "conclab/rng.hpp"

namespace conclab::func {

using num::kInf;

GridSet::GridSet(int dimension, std::array<int, 3> shape, Eigen::Vector3d origin, double h,
                 std::vector<std::uint8_t> mask)
    : dimension_(dimension), shape_(shape), origin_(origin), h_(h), mask_(std::move(mask)) {
  if (dimension_ != 2 && dimension_ != 3) throw PreconditionError("GridSet: dimension 2 or 3");
  if (dimension_ == 2) shape_[2] = 1;
  if (!(h_ > 0.0)) throw PreconditionError("GridSet: resolution must be positive");
  const std::size_t expected = static_cast<std::size_t>(shape_[0]) * shape_[1] * shape_[2];
  if (shape_[0] < 1 || shape_[1] < 1 || shape_[2] < 1 || mask_.size() != expected)
    throw PreconditionError("GridSet: mask size does not match the shape");
  if (member_count() == 0) throw PreconditionError("GridSet: mask is empty");
}

GridSet GridSet::from_predicate(int dimension, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                                double h,
                                const std::function<bool(const Eigen::Vector3d&)>& inside) {
  std::array<int, 3> shape{1, 1, 1};
  for (int d = 0; d < dimension; ++d)
    shape[d] = static_cast<int>(std::floor((hi[d] - lo[d]) / h + 1e-9)) + 1;
  Eigen::Vector3d origin = lo;
  if (dimension == 2) origin[2] = 0.0;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(shape[0]) * shape[1] * shape[2]);
  for (int k = 0; k < shape[2]; ++k)
    for (int j = 0; j < shape[1]; ++j)
      for (int i = 0; i < shape[0]; ++i) {
        const Eigen::Vector3d p = origin + h * Eigen::Vector3d(i, j, k);
        mask[(static_cast<std::size_t>(k) * shape[1] + j) * shape[0] + i] = inside(p) ? 1 : 0;
      }
  return GridSet(dimension, shape, origin, h, std::move(mask));
}

GridSet GridSet::from_bitmap(const std::string& text, double h, const Eigen::Vector2d& origin) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    for (char c : line)
      if (c != '0' && c != '1') throw PreconditionError("GridSet bitmap: only '0' and '1' allowed");
    if (!rows.empty() && line.size() != rows.front().size())
      throw PreconditionError("GridSet bitmap: rows must have equal length");
    rows.push_back(line);
  }
  if (rows.empty()) throw PreconditionError("GridSet bitmap: no rows");
  const int width = static_cast<int>(rows.front().size());
  const int height = static_cast<int>(rows.size());
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(width) * height);
  for (int j = 0; j < height; ++j)
    for (int i = 0; i < width; ++i)
      mask[static_cast<std::size_t>(j) * width + i] = rows[height - 1 - j][i] == '1' ? 1 : 0;
  return GridSet(2, {width, height, 1}, Eigen::Vector3d(origin[0], origin[1], 0.0), h,
                 std::move(mask));
}

GridSet GridSet::load_bitmap(const std::string& path, double h, const Eigen::Vector2d& origin) {
  std::ifstream file(path);
  if (!file) throw PreconditionError("GridSet: cannot open " + path);
  std::ostringstream text;
  text << file.rdbuf();
  return from_bitmap(text.str(), h, origin);
}

std::size_t GridSet::member_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

bool GridSet::in_bounds(const std::array<int, 3>& c) const {
  for (int d = 0; d < 3; ++d)
    if (c[d] < 0 || c[d] >= shape_[d]) return false;
  return true;
}

bool GridSet::member(const std::array<int, 3>& c) const { return in_bounds(c) && mask_[node(c)]; }

std::size_t GridSet::node(const std::array<int, 3>& c) const {
  return (static_cast<std::size_t>(c[2]) * shape_[1] + c[1]) * shape_[0] + c[0];
}

std::array<int, 3> GridSet::cell(std::size_t n) const {
  const int i = static_cast<int>(n % shape_[0]);
  const std::size_t rest = n / shape_[0];
  return {i, static_cast<int>(rest % shape_[1]), static_cast<int>(rest / shape_[1])};
}

Eigen::Vector3d GridSet::point(std::size_t n) const {
  const auto c = cell(n);
  return origin_ + h_ * Eigen::Vector3d(c[0], c[1], c[2]);
}

std::size_t GridSet::nearest(const Eigen::Vector3d& p) const {
  std::array<int, 3> c{};
  for (int d = 0; d < 3; ++d) {
    const long idx = std::lround((p[d] - origin_[d]) / h_);
    c[d] = static_cast<int>(std::clamp<long>(idx, 0, shape_[d] - 1));
  }
  return node(c);
}

double stencil_inflation(int dimension) {
  const double s2 = std::sqrt(2.0);
  if (dimension == 2) return std::sqrt(4.0 - 2.0 * s2);
  const double s3 = std::sqrt(3.0);
  return std::sqrt(1.0 + (s2 - 1.0) * (s2 - 1.0) + (s3 - s2) * (s3 - s2));
}

namespace {

struct Move {
  std::array<int, 3> offset;
  double length;
};

std::vector<Move> stencil(const GridSet& set) {
  std::vector<Move> moves;
  const int zr = set.dimension() == 3 ? 1 : 0;
  for (int dz = -zr; dz <= zr; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        moves.push_back({{dx, dy, dz}, set.h() * std::sqrt(double(dx * dx + dy * dy + dz * dz))});
      }
  return moves;
}

// A diagonal move is allowed only when every node of the cube it spans is a
// member, so no step cuts a corner of the complement.
bool move_allowed(const GridSet& set, const std::array<int, 3>& from, const Move& move) {
  for (int ez = 0; ez <= std::abs(move.offset[2]); ++ez)
    for (int ey = 0; ey <= std::abs(move.offset[1]); ++ey)
      for (int ex = 0; ex <= std::abs(move.offset[0]); ++ex) {
        const std::array<int, 3> c{from[0] + ex * move.offset[0], from[1] + ey * move.offset[1],
                                   from[2] + ez * move.offset[2]};
        if (!set.member(c)) return false;
      }
  return true;
}

struct ShortestPaths {
  std::vector<double> distance;
  std::vector<std::int64_t> parent;
};

ShortestPaths dijkstra(const GridSet& set, std::size_t source) {
  const std::vector<Move> moves = stencil(set);
  ShortestPaths sp{std::vector<double>(set.node_count(), kInf),
                   std::vector<std::int64_t>(set.node_count(), -1)};
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  sp.distance[source] = 0.0;
  queue.push({0.0, source});
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > sp.distance[u]) continue;
    const auto c = set.cell(u);
    for (const Move& move : moves) {
      if (!move_allowed(set, c, move)) continue;
      const std::size_t v =
          set.node({c[0] + move.offset[0], c[1] + move.offset[1], c[2] + move.offset[2]});
      const double nd = d + move.length;
      if (nd < sp.distance[v]) {
        sp.distance[v] = nd;
        sp.parent[v] = static_cast<std::int64_t>(u);
        queue.push({nd, v});
      }
    }
  }
  return sp;
}

// Every sample of the segment, taken at spacing h/8, rounds to a member node.
bool line_of_sight(const GridSet& set, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double length = (b - a).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(8.0 * length / set.h())));
  for (int k = 0; k <= steps; ++k) {
    const Eigen::Vector3d p = a + (b - a) * (static_cast<double>(k) / steps);
    if (!set.member(set.nearest(p))) return false;
  }
  return true;
}

double pulled_length(const GridSet& set, const std::vector<std::size_t>& path) {
  double total = 0.0;
  std::size_t anchor = 0;
  const std::size_t last = path.size() - 1;
  while (anchor < last) {
    const Eigen::Vector3d from = set.point(path[anchor]);
    const auto visible = [&](std::size_t j) { return line_of_sight(set, from, set.point(path[j])); };
    std::size_t good = anchor + 1;
    std::size_t step = 1;
    std::size_t bad = last + 1;
    while (good < last) {
      const std::size_t probe = std::min(last, good + step);
      if (visible(probe)) {
        good = probe;
        step *= 2;
      } else {
        bad = probe;
        break;
      }
    }
    while (bad - good > 1) {
      const std::size_t mid = good + (bad - good) / 2;
      if (visible(mid))
        good = mid;
      else
        bad = mid;
    }
    total += (set.point(path[good]) - from).norm();
    anchor = good;
  }
  return total;
}

PathRatio ratio_from(const GridSet& set, const ShortestPaths& sp, std::size_t from, std::size_t to) {
  PathRatio out;
  out.distance = (set.point(to) - set.point(from)).norm();
  out.graph_length = sp.distance[to];
  if (!std::isfinite(out.graph_length)) {
    out.pulled_length = out.ratio = kInf;
    return out;
  }
  if (out.distance == 0.0) {
    out.ratio = 1.0;
    return out;
  }
  std::vector<std::size_t> path;
  for (std::int64_t v = static_cast<std::int64_t>(to); v >= 0; v = sp.parent[v])
    path.push_back(static_cast<std::size_t>(v));
  std::reverse(path.begin(), path.end());
  out.pulled_length = std::min(out.graph_length, pulled_length(set, path));
  out.ratio = out.pulled_length / out.distance;
  return out;
}

}  // namespace

bool grid_connected(const GridSet& set) {
  std::vector<std::uint8_t> seen(set.node_count(), 0);
  std::size_t start = 0;
  while (!set.member(start)) ++start;
  std::vector<std::size_t> stack{start};
  seen[start] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    const auto c = set.cell(u);
    for (int d = 0; d < set.dimension(); ++d)
      for (int s : {-1, 1}) {
        auto nc = c;
        nc[d] += s;
        if (!set.member(nc)) continue;
        const std::size_t v = set.node(nc);
        if (seen[v]) continue;
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
  }
  return reached == set.member_count();
}

PathRatio pair_path_ratio(const GridSet& set, std::size_t from, std::size_t to) {
  if (!set.member(from) || !set.member(to))
    throw PreconditionError("pair_path_ratio: endpoints must be member nodes");
  return ratio_from(set, dijkstra(set, from), from, to);
}

ConnectivityEstimate connectivity_param(const GridSet& set, std::size_t pairs, std::uint64_t seed) {
  if (pairs == 0) throw PreconditionError("connectivity_param: need at least one pair");
  ConnectivityEstimate out;
  out.stencil_inflation = stencil_inflation(set.dimension());
  out.h = set.h();
  out.pairs = pairs;
  if (!grid_connected(set)) {
    out.connected = false;
    out.value = kInf;
    return out;
  }
  std::vector<std::size_t> members, boundary;
  for (std::size_t v = 0; v < set.node_count(); ++v) {
    if (!set.member(v)) continue;
    members.push_back(v);
    const auto c = set.cell(v);
    bool edge = false;
    for (int d = 0; d < set.dimension() && !edge; ++d)
      for (int s : {-1, 1}) {
        auto nc = c;
        nc[d] += s;
        if (!set.member(nc)) edge = true;
      }
    if (edge) boundary.push_back(v);
  }
  if (boundary.empty()) boundary = members;
  const std::size_t sources = std::min<std::size_t>(pairs, 16);
  const std::size_t per_source = (pairs + sources - 1) / sources;
  std::vector<PathRatio> worst(sources);
  std::vector<std::pair<std::size_t, std::size_t>> worst_pair(sources);
  parallel_for(sources, [&](std::size_t s) {
    Rng rng(seed, s);
    const auto draw = [&](bool from_boundary) {
      const auto& pool = from_boundary ? boundary : members;
      return pool[static_cast<std::size_t>(rng.uniform() * pool.size()) % pool.size()];
    };
    const std::size_t from = draw(s % 2 == 0);
    const ShortestPaths sp = dijkstra(set, from);
    worst[s].ratio = 1.0;
    worst_pair[s] = {from, from};
    const std::size_t used = s * per_source;
    const std::size_t count = used < pairs ? std::min(per_source, pairs - used) : 0;
    for (std::size_t t = 0; t < count; ++t) {
      const std::size_t to = draw(t % 2 == 0);
      const PathRatio r = ratio_from(set, sp, from, to);
      if (r.ratio > worst[s].ratio) {
        worst[s] = r;
        worst_pair[s] = {from, to};
      }
    }
  });
  out.value = 1.0;
  for (std::size_t s = 0; s < sources; ++s)
    if (worst[s].ratio > out.value) {
      out.value = worst[s].ratio;
      out.worst_from = set.point(worst_pair[s].first);
      out.worst_to = set.point(worst_pair[s].second);
    }
  return out;
}

}  // namespace conclab::func
