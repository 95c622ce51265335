#include <gtest/gtest.h>

#include <vector>

#include "clab/replica/clocks.hpp"
#include "clab/replica/topology.hpp"
#include "clab/replica/version_chain.hpp"
#include "clab/sim/rng.hpp"

namespace clab {
namespace {

TEST(Partitioning, SinglePartition) {
  Topology t;
  for (Key k : {Key{0}, Key{1} << 63, ~Key{0}}) EXPECT_EQ(partition_for_key(k, t, 0), (NodeId{0, 0}));
}

TEST(Partitioning, SameIndexInEveryDatacenter) {
  Topology t;
  t.num_dcs = 3;
  t.partitions_per_dc = 8;
  const Key k = 0x9e3779b97f4a7c15ULL;
  EXPECT_EQ(partition_for_key(k, t, 0).partition, partition_for_key(k, t, 2).partition);
  EXPECT_EQ(partition_for_key(k, t, 2).dc, 2u);
}

TEST(Partitioning, UniformOverSeededKeys) {
  Rng rng(11);
  std::vector<int> counts(8, 0);
  for (int i = 0; i < 100000; ++i) ++counts[partition_index(rng.next(), 8)];
  for (int c : counts) {
    EXPECT_GE(c, 12500 * 0.95);
    EXPECT_LE(c, 12500 * 1.05);
  }
}

TEST(Partitioning, RangeBoundaries) {
  for (std::uint32_t parts : {1u, 3u, 8u, 7u}) {
    for (std::uint32_t p = 0; p < parts; ++p) {
      const Key first = first_key_of(p, parts);
      EXPECT_EQ(partition_index(first, parts), p);
      if (p > 0) EXPECT_EQ(partition_index(first - 1, parts), p - 1);
    }
    EXPECT_EQ(partition_index(~Key{0}, parts), parts - 1);
  }
}

TEST(Topology, QuorumValidation) {
  Topology t;
  t.num_dcs = 3;
  EXPECT_NO_THROW(t.validate(true));
  t.r = 4;
  EXPECT_THROW(t.validate(true), ConfigError);
  t.r = 2;
  t.w = 0;
  EXPECT_THROW(t.validate(true), ConfigError);
}

TEST(Lamport, FreshNodeIssuesOne) {
  LamportClock c(NodeId{0, 1});
  EXPECT_EQ(c.issue().counter, 1u);
}

TEST(Lamport, MergeTakesMaxPlusOne) {
  LamportClock c(NodeId{0, 1});
  for (int i = 0; i < 10; ++i) c.issue();
  c.merge({41, NodeId{1, 0}});
  EXPECT_EQ(c.issue().counter, 42u);
  c.merge({3, NodeId{1, 0}});
  EXPECT_EQ(c.issue().counter, 43u);
}

TEST(Lamport, TieBreakByNode) {
  const LamportStamp a{5, NodeId{0, 1}};
  const LamportStamp b{5, NodeId{1, 0}};
  EXPECT_LT(a, b);
}

TEST(VectorClock, Comparisons) {
  const NodeId n1{0, 0};
  const NodeId n2{1, 0};
  const VectorClock a{{n1, 2}, {n2, 1}};
  EXPECT_EQ(vc_compare(a, a), VcOrder::equal);
  EXPECT_EQ(vc_compare(a, VectorClock{{n1, 1}, {n2, 1}}), VcOrder::after);
  const VectorClock c{{n1, 2}, {n2, 0}};
  const VectorClock d{{n1, 1}, {n2, 3}};
  EXPECT_EQ(vc_compare(c, d), VcOrder::concurrent);
  EXPECT_EQ(vc_compare(VectorClock{}, a), VcOrder::before);
}

TEST(VectorClock, ComparisonIsAntisymmetric) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    VectorClock a;
    VectorClock b;
    for (std::uint32_t n = 0; n < 4; ++n) {
      a.set(NodeId{n, 0}, rng.below(3));
      b.set(NodeId{n, 0}, rng.below(3));
    }
    const auto ab = vc_compare(a, b);
    const auto ba = vc_compare(b, a);
    if (ab == VcOrder::before) EXPECT_EQ(ba, VcOrder::after);
    if (ab == VcOrder::after) EXPECT_EQ(ba, VcOrder::before);
    if (ab == VcOrder::concurrent || ab == VcOrder::equal) EXPECT_EQ(ba, ab);
    EXPECT_EQ(ab == VcOrder::equal, a == b);
  }
}

struct TestVersion {
  LamportStamp stamp;
  Value value;
  LamportStamp order() const { return stamp; }
};

TEST(VersionChain, EmptyReadsInitialValue) {
  VersionChain<TestVersion> chain;
  EXPECT_EQ(chain.head(), nullptr);
  EXPECT_EQ(chain.latest_where([](const TestVersion&) { return true; }), nullptr);
}

TEST(VersionChain, HigherStampWins) {
  VersionChain<TestVersion> chain;
  chain.install({{7, NodeId{1, 0}}, 70});
  chain.install({{3, NodeId{0, 0}}, 30});
  ASSERT_NE(chain.head(), nullptr);
  EXPECT_EQ(chain.head()->value, 70u);
  EXPECT_FALSE(chain.install({{7, NodeId{1, 0}}, 71}));
  EXPECT_TRUE(chain.contains(LamportStamp{3, NodeId{0, 0}}));
  EXPECT_FALSE(chain.contains(LamportStamp{3, NodeId{0, 1}}));
  const auto* old = chain.latest_where([](const TestVersion& v) { return v.stamp.counter < 5; });
  ASSERT_NE(old, nullptr);
  EXPECT_EQ(old->value, 30u);
}

TEST(SiblingSet, ConcurrentVersionsAreBothReturned) {
  const NodeId a{0, 0};
  const NodeId b{1, 0};
  SiblingSet s;
  EXPECT_TRUE(s.install({1, VectorClock{{a, 1}}, 1}));
  EXPECT_TRUE(s.install({2, VectorClock{{b, 1}}, 2}));
  EXPECT_EQ(s.heads().size(), 2u);
  // A write that has seen both replaces them.
  EXPECT_TRUE(s.install({3, VectorClock{{a, 2}, {b, 1}}, 3}));
  ASSERT_EQ(s.heads().size(), 1u);
  EXPECT_EQ(s.heads()[0].value, 3u);
  // Stale and duplicate versions are ignored.
  EXPECT_FALSE(s.install({1, VectorClock{{a, 1}}, 1}));
  EXPECT_FALSE(s.install({3, VectorClock{{a, 2}, {b, 1}}, 3}));
  EXPECT_TRUE(s.covers(VectorClock{{b, 1}}));
}

TEST(SiblingSet, NeverRetainsDominatedVersions) {
  Rng rng(17);
  SiblingSet s;
  for (int i = 0; i < 500; ++i) {
    VectorClock vc;
    for (std::uint32_t n = 0; n < 3; ++n) vc.set(NodeId{n, 0}, rng.below(4));
    s.install({static_cast<Value>(i), vc, 0});
    for (const auto& x : s.heads())
      for (const auto& y : s.heads())
        if (&x != &y) ASSERT_EQ(vc_compare(x.clock, y.clock), VcOrder::concurrent);
  }
}

}  // namespace
}  // namespace clab
