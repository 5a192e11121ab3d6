#include "qsteady/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>

#include "qsteady/errors.hpp"

namespace qsteady {

namespace {

constexpr double kWeightTolerance = 1e-12;

std::vector<int> bfs_distances(const InteractionGraph& g, const SupportSet& sources) {
  std::vector<int> dist(static_cast<std::size_t>(g.num_vertices()), -1);
  std::deque<int> frontier;
  for (int s : sources) {
    dist[static_cast<std::size_t>(s)] = 0;
    frontier.push_back(s);
  }
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    for (int v : g.neighbors(u)) {
      auto& dv = dist[static_cast<std::size_t>(v)];
      if (dv < 0) {
        dv = dist[static_cast<std::size_t>(u)] + 1;
        frontier.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace

SupportSet::SupportSet(std::initializer_list<int> sites) : SupportSet(std::vector<int>(sites)) {}

SupportSet::SupportSet(std::vector<int> sites) : sites_(std::move(sites)) {
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
}

SupportSet SupportSet::from_mask(std::uint64_t mask) {
  std::vector<int> sites;
  for (int i = 0; mask != 0; ++i, mask >>= 1) {
    if (mask & 1u) sites.push_back(i);
  }
  return SupportSet(std::move(sites));
}

bool SupportSet::contains(int site) const {
  return std::binary_search(sites_.begin(), sites_.end(), site);
}

bool SupportSet::intersects(const SupportSet& other) const {
  auto i = sites_.begin();
  auto j = other.sites_.begin();
  while (i != sites_.end() && j != other.sites_.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i; else ++j;
  }
  return false;
}

bool SupportSet::is_subset_of(const SupportSet& other) const {
  return std::includes(other.sites_.begin(), other.sites_.end(), sites_.begin(), sites_.end());
}

SupportSet SupportSet::unite(const SupportSet& other) const {
  std::vector<int> out;
  out.reserve(sites_.size() + other.sites_.size());
  std::set_union(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                 std::back_inserter(out));
  SupportSet result;
  result.sites_ = std::move(out);
  return result;
}

int SupportSet::position_of(int site) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), site);
  if (it == sites_.end() || *it != site) return -1;
  return static_cast<int>(it - sites_.begin());
}

std::uint64_t SupportSet::mask() const {
  std::uint64_t m = 0;
  for (int s : sites_) {
    if (s < 0 || s >= 64) throw InvalidSupportError("site index " + std::to_string(s) + " does not fit a 64-bit mask");
    m |= std::uint64_t{1} << s;
  }
  return m;
}

void SupportSet::validate(int n) const {
  for (int s : sites_) {
    if (s < 0 || s >= n) {
      throw InvalidSupportError("site index " + std::to_string(s) + " outside [0, " +
                                std::to_string(n) + ")");
    }
  }
}

InteractionGraph InteractionGraph::from_edges(int n, const std::vector<WeightedEdge>& edges) {
  if (n < 1) throw InvalidGraphError("graph needs at least one vertex");
  InteractionGraph g;
  g.n_ = n;
  std::set<Edge> seen;
  double total = 0.0;
  for (const auto& we : edges) {
    const Edge& e = we.edge;
    if (e.a == e.b) throw InvalidGraphError("self-loop at vertex " + std::to_string(e.a));
    if (e.a < 0 || e.b >= n) {
      throw InvalidGraphError("edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                              ") has a vertex outside [0, " + std::to_string(n) + ")");
    }
    if (!seen.insert(e).second) {
      throw InvalidGraphError("duplicate edge (" + std::to_string(e.a) + "," +
                              std::to_string(e.b) + ")");
    }
    if (!(we.weight >= 0.0)) throw InvalidGraphError("negative or NaN edge weight");
    total += we.weight;
    g.edges_.push_back(e);
    g.edge_weights_.push_back(we.weight);
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw InvalidGraphError("edge weights sum to " + std::to_string(total) + ", expected 1");
  }

  g.vertex_weights_.assign(static_cast<std::size_t>(n), 0.0);
  g.incident_.assign(static_cast<std::size_t>(n), {});
  g.neighbors_.assign(static_cast<std::size_t>(n), {});
  for (std::size_t k = 0; k < g.edges_.size(); ++k) {
    const Edge& e = g.edges_[k];
    for (int v : {e.a, e.b}) {
      g.vertex_weights_[static_cast<std::size_t>(v)] += 0.5 * g.edge_weights_[k];
      g.incident_[static_cast<std::size_t>(v)].push_back(k);
    }
    g.neighbors_[static_cast<std::size_t>(e.a)].push_back(e.b);
    g.neighbors_[static_cast<std::size_t>(e.b)].push_back(e.a);
  }
  for (auto& nb : g.neighbors_) std::sort(nb.begin(), nb.end());

  // Recompute q_i independently and check the stored values.
  double qsum = 0.0;
  for (int i = 0; i < n; ++i) {
    double q = 0.0;
    for (std::size_t k = 0; k < g.edges_.size(); ++k) {
      if (g.edges_[k].touches(i)) q += g.edge_weights_[k];
    }
    q *= 0.5;
    if (std::abs(q - g.vertex_weights_[static_cast<std::size_t>(i)]) > kWeightTolerance) {
      throw InvalidGraphError("vertex weight drift at vertex " + std::to_string(i));
    }
    qsum += q;
  }
  if (std::abs(qsum - 1.0) > kWeightTolerance) {
    throw InvalidGraphError("vertex weights sum to " + std::to_string(qsum));
  }

  g.is_ring_ = n >= 3 && g.edges_.size() == static_cast<std::size_t>(n);
  if (g.is_ring_) {
    for (int i = 0; i < n && g.is_ring_; ++i) {
      g.is_ring_ = seen.count(Edge(i, (i + 1) % n)) == 1;
    }
  }
  return g;
}

double InteractionGraph::edge_weight(int u, int v) const {
  auto idx = edge_index(u, v);
  if (!idx) {
    throw InvalidGraphError("no edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
  }
  return edge_weights_[*idx];
}

std::optional<std::size_t> InteractionGraph::edge_index(int u, int v) const {
  const Edge key(u, v);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (edges_[k] == key) return k;
  }
  return std::nullopt;
}

InteractionGraph build_ring(int n) {
  if (n < 3) throw InvalidGraphError("a ring needs n >= 3, got " + std::to_string(n));
  std::vector<WeightedEdge> edges;
  edges.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    edges.push_back({Edge(i, (i + 1) % n), 1.0 / n});
  }
  return InteractionGraph::from_edges(n, edges);
}

InteractionGraph build_chain(int n) {
  if (n < 2) throw InvalidGraphError("a chain needs n >= 2, got " + std::to_string(n));
  std::vector<WeightedEdge> edges;
  for (int i = 0; i + 1 < n; ++i) {
    edges.push_back({Edge(i, i + 1), 1.0 / (n - 1)});
  }
  return InteractionGraph::from_edges(n, edges);
}

SupportSet graph_ball(const InteractionGraph& g, const SupportSet& s, int r) {
  if (s.empty()) throw InvalidSupportError("graph_ball needs a nonempty support");
  if (r < 0) throw InvalidSupportError("graph_ball radius must be nonnegative");
  s.validate(g.num_vertices());
  const auto dist = bfs_distances(g, s);
  std::vector<int> out;
  for (int v = 0; v < g.num_vertices(); ++v) {
    const int d = dist[static_cast<std::size_t>(v)];
    if (d >= 0 && d <= r) out.push_back(v);
  }
  return SupportSet(std::move(out));
}

int ring_diameter(int n, std::uint64_t site_mask) {
  if (site_mask == 0) return 0;
  // Longest cyclic run of zeros: scan twice around the ring.
  int longest = 0;
  int run = 0;
  for (int step = 0; step < 2 * n; ++step) {
    const int i = step % n;
    if ((site_mask >> i) & 1u) {
      run = 0;
    } else {
      run = std::min(run + 1, n);
      longest = std::max(longest, run);
    }
  }
  return n - longest;
}

int ring_diameter(int n, const SupportSet& s) {
  s.validate(n);
  return ring_diameter(n, s.mask());
}

int ring_diameter(const InteractionGraph& g, const SupportSet& s) {
  if (!g.is_ring()) throw UnsupportedError("ring_diameter is defined only on ring graphs");
  return ring_diameter(g.num_vertices(), s);
}

std::optional<int> graph_distance(const InteractionGraph& g, const SupportSet& a,
                                  const SupportSet& b) {
  if (a.empty() || b.empty()) throw InvalidSupportError("graph_distance needs nonempty supports");
  a.validate(g.num_vertices());
  b.validate(g.num_vertices());
  const auto dist = bfs_distances(g, a);
  std::optional<int> best;
  for (int v : b) {
    const int d = dist[static_cast<std::size_t>(v)];
    if (d >= 0 && (!best || d < *best)) best = d;
  }
  return best;
}

}  // namespace qsteady
