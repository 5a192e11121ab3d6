#include <gtest/gtest.h>

#include "qsteady/errors.hpp"
#include "qsteady/lattice.hpp"

using namespace qsteady;

TEST(Ring, TenQubitsUniformWeights) {
  const auto g = build_ring(10);
  ASSERT_EQ(g.num_vertices(), 10);
  ASSERT_EQ(g.num_edges(), 10u);
  for (std::size_t e = 0; e < g.num_edges(); ++e) EXPECT_DOUBLE_EQ(g.edge_weight(e), 0.1);
  for (int i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(g.vertex_weight(i), 0.1);
  EXPECT_TRUE(g.is_ring());
}

TEST(Ring, FourQubitEdges) {
  const auto g = build_ring(4);
  for (auto [u, v] : {std::pair{0, 1}, {1, 2}, {2, 3}, {3, 0}}) {
    EXPECT_TRUE(g.edge_index(u, v).has_value()) << u << "-" << v;
    EXPECT_TRUE(g.edge_index(v, u).has_value());
  }
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(g.vertex_weight(i), 0.25);
}

TEST(Ring, TooSmallIsRejected) {
  EXPECT_THROW(build_ring(2), InvalidGraphError);
  EXPECT_THROW(build_ring(0), InvalidGraphError);
}

TEST(Ring, UniformVertexWeightIsExactlyOneOverN) {
  for (int n = 3; n <= 16; ++n) {
    const auto g = build_ring(n);
    for (int i = 0; i < n; ++i) EXPECT_EQ(g.vertex_weight(i), 1.0 / n);
  }
}

TEST(Chain, TwoQubits) {
  const auto g = build_chain(2);
  ASSERT_EQ(g.num_edges(), 1u);
  EXPECT_DOUBLE_EQ(g.vertex_weight(0), 0.5);
  EXPECT_FALSE(g.is_ring());
}

TEST(Graph, VertexWeightsAreHalfIncidentSums) {
  const auto g = InteractionGraph::from_edges(4, {{Edge(0, 1), 0.5}, {Edge(1, 2), 0.3}, {Edge(3, 2), 0.2}});
  EXPECT_NEAR(g.vertex_weight(0), 0.25, 1e-15);
  EXPECT_NEAR(g.vertex_weight(1), 0.4, 1e-15);
  EXPECT_NEAR(g.vertex_weight(2), 0.25, 1e-15);
  EXPECT_NEAR(g.vertex_weight(3), 0.1, 1e-15);
  double total = 0.0;
  for (double q : g.vertex_weights()) total += q;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(g.edge_weight(2, 3), 0.2);
}

TEST(Graph, RejectsMalformedEdgeLists) {
  EXPECT_THROW(InteractionGraph::from_edges(3, {{Edge(0, 0), 1.0}}), InvalidGraphError);
  EXPECT_THROW(InteractionGraph::from_edges(3, {{Edge(0, 1), 0.5}, {Edge(1, 0), 0.5}}), InvalidGraphError);
  EXPECT_THROW(InteractionGraph::from_edges(3, {{Edge(0, 1), 0.6}, {Edge(1, 2), 0.6}}), InvalidGraphError);
  EXPECT_THROW(InteractionGraph::from_edges(3, {{Edge(0, 1), 1.5}, {Edge(1, 2), -0.5}}), InvalidGraphError);
  EXPECT_THROW(InteractionGraph::from_edges(3, {{Edge(0, 5), 1.0}}), InvalidGraphError);
}

TEST(Ball, Examples) {
  const auto g = build_ring(10);
  EXPECT_EQ(graph_ball(g, SupportSet{0}, 0), (SupportSet{0}));
  EXPECT_EQ(graph_ball(g, SupportSet{0}, 2), (SupportSet{8, 9, 0, 1, 2}));
  EXPECT_EQ(graph_ball(g, SupportSet{0, 5}, 1), (SupportSet{9, 0, 1, 4, 5, 6}));
  EXPECT_THROW(graph_ball(g, SupportSet{10}, 1), InvalidSupportError);
}

TEST(Ball, MonotoneAndStabilizes) {
  for (int n : {5, 8, 11}) {
    const auto g = build_ring(n);
    for (int s = 0; s < n; ++s) {
      SupportSet prev{s};
      for (int r = 1; r <= n; ++r) {
        const SupportSet cur = graph_ball(g, SupportSet{s}, r);
        EXPECT_TRUE(prev.is_subset_of(cur));
        if (r >= n / 2) EXPECT_EQ(static_cast<int>(cur.size()), n);
        prev = cur;
      }
    }
  }
}

TEST(Diameter, Examples) {
  EXPECT_EQ(ring_diameter(10, SupportSet{}), 0);
  EXPECT_EQ(ring_diameter(10, SupportSet{3}), 1);
  EXPECT_EQ(ring_diameter(10, SupportSet{0, 5}), 6);
  EXPECT_EQ(ring_diameter(10, SupportSet{9, 0}), 2);
}

TEST(Diameter, AtLeastSizeWithEqualityIffContiguous) {
  const int n = 8;
  for (std::uint64_t mask = 1; mask < (1u << n); ++mask) {
    const SupportSet s = SupportSet::from_mask(mask);
    const int d = ring_diameter(n, s);
    EXPECT_EQ(d, ring_diameter(n, mask));
    EXPECT_GE(d, static_cast<int>(s.size()));
    // Contiguous on the cycle: at most one run of absent sites.
    int runs = 0;
    for (int i = 0; i < n; ++i) {
      const bool here = (mask >> i) & 1u, next = (mask >> ((i + 1) % n)) & 1u;
      if (here && !next) ++runs;
    }
    const bool contiguous = runs <= 1;
    EXPECT_EQ(d == static_cast<int>(s.size()), contiguous) << "mask " << mask;
  }
}

TEST(Diameter, RejectsNonRings) {
  EXPECT_THROW(ring_diameter(build_chain(4), SupportSet{0, 3}), UnsupportedError);
  EXPECT_EQ(ring_diameter(build_ring(6), SupportSet{0, 3}), 4);
}

TEST(Distance, Examples) {
  const auto g = build_ring(10);
  EXPECT_EQ(graph_distance(g, SupportSet{0}, SupportSet{0}), 0);
  EXPECT_EQ(graph_distance(g, SupportSet{0}, SupportSet{4}), 4);
  EXPECT_EQ(graph_distance(g, SupportSet{0, 1}, SupportSet{5, 6}), 4);
}

TEST(Distance, DisconnectedIsReported) {
  const auto g = InteractionGraph::from_edges(4, {{Edge(0, 1), 0.5}, {Edge(2, 3), 0.5}});
  EXPECT_FALSE(graph_distance(g, SupportSet{0}, SupportSet{3}).has_value());
  EXPECT_EQ(graph_distance(g, SupportSet{0}, SupportSet{1}), 1);
}

TEST(Distance, SymmetricAndTriangle) {
  const auto g = build_ring(9);
  for (int a = 0; a < 9; ++a)
    for (int b = 0; b < 9; ++b) {
      const int dab = *graph_distance(g, SupportSet{a}, SupportSet{b});
      EXPECT_EQ(dab, *graph_distance(g, SupportSet{b}, SupportSet{a}));
      for (int c = 0; c < 9; ++c) {
        EXPECT_LE(dab, *graph_distance(g, SupportSet{a}, SupportSet{c}) +
                           *graph_distance(g, SupportSet{c}, SupportSet{b}));
      }
    }
}

TEST(SupportSetTest, CanonicalizesAndValidates) {
  const SupportSet s{5, 1, 3, 1};
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], 1);
  EXPECT_EQ(s.mask(), 0b101010u);
  EXPECT_EQ(SupportSet::from_mask(0b101010u), s);
  EXPECT_THROW(s.validate(4), InvalidSupportError);
  EXPECT_NO_THROW(s.validate(6));
  EXPECT_EQ(s.position_of(3), 1);
}
