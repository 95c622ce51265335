#include <gtest/gtest.h>

#include "clab/bench/workload.hpp"
#include "clab/replica/topology.hpp"

namespace clab::bench {
namespace {

TEST(Workload, WriteOnlyRatioIssuesOnlyPuts) {
  WorkloadSpec s;
  s.reads = 0;
  s.writes = 1;
  WorkloadStream w(s, 4, 1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(w.next().kind, OpKind::put);
}

TEST(Workload, ReadAllWriteOneCoversEveryPartitionThenWritesOnce) {
  WorkloadSpec s;
  s.pattern = Pattern::read_all_write_one;
  WorkloadStream w(s, 8, 3);
  for (int round = 0; round < 5; ++round) {
    std::vector<bool> seen(8, false);
    for (int i = 0; i < 8; ++i) {
      const auto op = w.next();
      ASSERT_EQ(op.kind, OpKind::get);
      seen[partition_index(op.key, 8)] = true;
    }
    EXPECT_EQ(std::count(seen.begin(), seen.end(), true), 8);
    EXPECT_EQ(w.next().kind, OpKind::put);
  }
}

TEST(Workload, RatioRoundWritesDistinctPartitions) {
  WorkloadSpec s;
  s.reads = 3;
  s.writes = 4;
  WorkloadStream w(s, 4, 9);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(w.next().kind, OpKind::get);
  std::vector<bool> seen(4, false);
  for (int i = 0; i < 4; ++i) {
    const auto op = w.next();
    ASSERT_EQ(op.kind, OpKind::put);
    seen[partition_index(op.key, 4)] = true;
  }
  EXPECT_EQ(std::count(seen.begin(), seen.end(), true), 4);
}

TEST(Workload, KeysStayInsideTheirPartitionRange) {
  WorkloadSpec s;
  s.keys_per_partition = 10;
  s.distribution = KeyDistribution::zipf;
  WorkloadStream w(s, 3, 5);
  for (int i = 0; i < 500; ++i) {
    const Key k = w.next().key;
    const auto p = partition_index(k, 3);
    EXPECT_LT(k - first_key_of(p, 3), 10u);
  }
}

TEST(Workload, SameSeedSameStream) {
  WorkloadSpec s;
  WorkloadStream a(s, 4, 17);
  WorkloadStream b(s, 4, 17);
  WorkloadStream c(s, 4, 18);
  bool differs = false;
  for (int i = 0; i < 200; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs = differs || !(x == c.next());
  }
  EXPECT_TRUE(differs);
}

TEST(Workload, CustomCycleParsesAndRepeats) {
  WorkloadSpec s;
  s.pattern = Pattern::custom;
  s.custom = parse_custom("G0.1, P1.0");
  EXPECT_EQ(format_custom(s.custom), "G0.1,P1.0");
  WorkloadStream w(s, 2, 1);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(w.next(), (WorkloadOp{OpKind::get, workload_key(0, 1, 2)}));
    EXPECT_EQ(w.next(), (WorkloadOp{OpKind::put, workload_key(1, 0, 2)}));
  }
  EXPECT_THROW(parse_custom("X0.1"), ConfigError);
  EXPECT_THROW(parse_custom("G0"), ConfigError);
  s.custom = parse_custom("G5.0");
  EXPECT_THROW(s.validate(2), ConfigError);
}

}  // namespace
}  // namespace clab::bench
