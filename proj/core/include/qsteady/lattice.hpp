#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <utility>
#include <vector>

namespace qsteady {

/// Sorted, duplicate-free set of qubit indices.
class SupportSet {
 public:
  SupportSet() = default;
  SupportSet(std::initializer_list<int> sites);
  explicit SupportSet(std::vector<int> sites);

  /// Builds a support from bit i of `mask` meaning "site i present".
  static SupportSet from_mask(std::uint64_t mask);

  const std::vector<int>& sites() const noexcept { return sites_; }
  std::size_t size() const noexcept { return sites_.size(); }
  bool empty() const noexcept { return sites_.empty(); }
  int operator[](std::size_t i) const { return sites_[i]; }
  auto begin() const noexcept { return sites_.begin(); }
  auto end() const noexcept { return sites_.end(); }

  bool contains(int site) const;
  bool intersects(const SupportSet& other) const;
  bool is_subset_of(const SupportSet& other) const;
  SupportSet unite(const SupportSet& other) const;
  /// Position of `site` within the sorted list, or -1.
  int position_of(int site) const;
  std::uint64_t mask() const;

  /// Throws InvalidSupportError unless every index lies in [0, n).
  void validate(int n) const;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<int> sites_;
};

/// Undirected edge stored as (min, max).
struct Edge {
  int a = 0;
  int b = 0;

  Edge() = default;
  Edge(int u, int v) : a(u < v ? u : v), b(u < v ? v : u) {}

  bool touches(int site) const noexcept { return a == site || b == site; }
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct WeightedEdge {
  Edge edge;
  double weight = 0.0;
};

/// Interaction graph with a probability distribution p_e over its edges and
/// the derived vertex distribution q_i = 1/2 sum_{e containing i} p_e.
/// Immutable once built.
class InteractionGraph {
 public:
  /// Validates and canonicalizes. Throws InvalidGraphError on self-loops,
  /// duplicate edges, negative weights or weights not summing to one.
  static InteractionGraph from_edges(int n, const std::vector<WeightedEdge>& edges);

  int num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t index) const { return edges_.at(index); }
  double edge_weight(std::size_t index) const { return edge_weights_.at(index); }
  /// Order-insensitive lookup; throws InvalidGraphError if absent.
  double edge_weight(int u, int v) const;
  std::optional<std::size_t> edge_index(int u, int v) const;
  double vertex_weight(int i) const { return vertex_weights_.at(static_cast<std::size_t>(i)); }
  const std::vector<double>& vertex_weights() const noexcept { return vertex_weights_; }

  /// Indices of edges incident to vertex i.
  const std::vector<std::size_t>& incident_edges(int i) const {
    return incident_.at(static_cast<std::size_t>(i));
  }
  const std::vector<int>& neighbors(int i) const {
    return neighbors_.at(static_cast<std::size_t>(i));
  }

  /// True iff the edges are exactly (i, i+1 mod n) for n >= 3.
  bool is_ring() const noexcept { return is_ring_; }

 private:
  InteractionGraph() = default;

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> edge_weights_;
  std::vector<double> vertex_weights_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<std::vector<int>> neighbors_;
  bool is_ring_ = false;
};

/// Ring of n >= 3 qubits with uniform edge weights 1/n.
InteractionGraph build_ring(int n);

/// Open chain 0-1-...-(n-1) with uniform edge weights; the only way to get a
/// two-qubit model (a 2-ring would duplicate its edge).
InteractionGraph build_chain(int n);

/// All vertices within graph distance r of s.
SupportSet graph_ball(const InteractionGraph& g, const SupportSet& s, int r);

/// n minus the longest cyclic run of sites absent from s; 0 for empty s.
int ring_diameter(int n, const SupportSet& s);
int ring_diameter(int n, std::uint64_t site_mask);
/// Same rule, but rejects graphs that are not rings.
int ring_diameter(const InteractionGraph& g, const SupportSet& s);

/// Minimum shortest-path length between the two supports; nullopt when no
/// pair is connected.
std::optional<int> graph_distance(const InteractionGraph& g, const SupportSet& a,
                                  const SupportSet& b);

}  // namespace qsteady
