#include <gtest/gtest.h>

#include "clab/proto/cops.hpp"
#include "support/harness.hpp"

namespace clab::proto {
namespace {

using consistency::OpKind;
using test::Harness;

constexpr SimTime kNtt = 20 * kMillisecond;
constexpr SimTime kIntra = 50;

Harness cops(std::uint32_t dcs, std::uint32_t partitions, NetworkModel net) {
  return Harness(ProtocolKind::cops, test::topology(dcs, partitions), std::move(net));
}

Harness cops(std::uint32_t dcs, std::uint32_t partitions) {
  return cops(dcs, partitions, NetworkModel::uniform(dcs, kNtt));
}

Key key_on(std::uint32_t p, std::uint32_t partitions, std::uint64_t i = 0) { return first_key_of(p, partitions) + i; }

TEST(Cops, FreshStoreReturnsInitialValue) {
  auto h = cops(2, 1);
  auto c = h.client(0);
  const auto r = h.get(c, 5);
  EXPECT_EQ(r.value, kInitialValue);
  EXPECT_EQ(r.cops_ver.counter, 0u);
}

TEST(Cops, LocalPutIsImmediatelyReadable) {
  auto h = cops(2, 1);
  auto c = h.client(0);
  const auto w = h.put(c, 5, 7);
  const auto r = h.get(c, 5);
  EXPECT_EQ(r.value, 7u);
  EXPECT_EQ(r.cops_ver, w.cops_ver);
}

TEST(Cops, SecondPutCarriesTheFirstInItsContext) {
  auto h = cops(2, 2);
  auto c = h.client(0);
  const auto w = h.put(c, key_on(0, 2), 1);
  ClientRequest req;
  req.kind = OpKind::put;
  c.session->prepare(req);
  ASSERT_EQ(req.cops_context.size(), 1u);
  EXPECT_EQ(req.cops_context[0].key, key_on(0, 2));
  EXPECT_EQ(req.cops_context[0].ver, w.cops_ver);
}

TEST(Cops, EmptyContextNeedsNoDepCheckAndArrivesAfterOneTravelTime) {
  auto h = cops(2, 2);
  auto c = h.client(0);
  const auto w = h.put(c, key_on(1, 2), 9);
  h.kernel.run_until(h.kernel.now() + kSecond);
  EXPECT_EQ(h.dispatched(message_index<CopsDepCheck>()), 0u);
  const auto& v = h.trace.at(w.version);
  ASSERT_TRUE(v.visible_at[1]);
  EXPECT_EQ(*v.visible_at[1] - v.created, kNtt);
}

TEST(Cops, CrossPartitionContextSendsOneDepCheckPerRemoteDatacenter) {
  auto h = cops(3, 2);
  auto c = h.client(0);
  h.put(c, key_on(1, 2), 1);  // y
  h.put(c, key_on(0, 2), 2);  // x depends on y
  h.kernel.run_until(h.kernel.now() + kSecond);
  EXPECT_EQ(h.dispatched(message_index<CopsDepCheck>()), 2u);
  EXPECT_EQ(h.dispatched(message_index<CopsPutAfter>()), 4u);
}

TEST(Cops, ContextKeepsOwnWriteAlongsideANewerConcurrentVersion) {
  auto h = cops(2, 2);
  auto a = h.client(0);
  auto b = h.client(1);
  const Key y = key_on(1, 2);
  const auto own = h.put(b, y, 1);
  for (Value v = 2; v <= 4; ++v) h.put(a, y, v);
  h.kernel.run_until(h.kernel.now() + kSecond);
  const auto newer = h.get(b, y);
  ASSERT_EQ(newer.value, 4u);
  ASSERT_LT(own.cops_ver, newer.cops_ver);

  ClientRequest req;
  req.kind = OpKind::put;
  b.session->prepare(req);
  ASSERT_EQ(req.cops_context.size(), 2u);
  EXPECT_EQ(req.cops_context[0].ver, own.cops_ver);
  EXPECT_EQ(req.cops_context[1].ver, newer.cops_ver);

  // Both versions of y travel in a single check.
  const auto x = h.put(b, key_on(0, 2), 5);
  h.kernel.run_until(h.kernel.now() + kSecond);
  EXPECT_EQ(h.dispatched(message_index<CopsDepCheck>()), 1u);
  EXPECT_LE(*h.trace.at(own.version).visible_at[0], *h.trace.at(x.version).visible_at[0]);
}

TEST(Cops, SinglePartitionNeverSendsDepChecks) {
  auto h = cops(3, 1);
  auto c = h.client(0);
  for (Value v = 1; v <= 5; ++v) {
    h.get(c, v % 2);
    h.put(c, v % 3, v);
  }
  h.kernel.run_until(h.kernel.now() + kSecond);
  EXPECT_EQ(h.dispatched(message_index<CopsDepCheck>()), 0u);
  EXPECT_TRUE(consistency::check_dependency_visibility(h.trace).satisfied);
}

TEST(Cops, VisibleDependencyCostsOneIntraDatacenterRoundTrip) {
  auto h = cops(2, 2);
  auto c = h.client(0);
  h.put(c, key_on(1, 2), 1);
  h.kernel.run_until(h.kernel.now() + kSecond);  // y is visible everywhere
  const auto x = h.put(c, key_on(0, 2), 2);
  h.kernel.run_until(h.kernel.now() + kSecond);
  const auto& v = h.trace.at(x.version);
  ASSERT_TRUE(v.visible_at[1]);
  EXPECT_EQ(*v.visible_at[1] - v.created, kNtt + 2 * kIntra);
}

TEST(Cops, MissingDependencyDefersVisibilityUntilItIsInstalled) {
  // DC0 is far from DC2 and DC1 is close to it, so a version written in DC1
  // that depends on one from DC0 reaches DC2 before its dependency.
  NetworkModel net = NetworkModel::uniform(3, 10 * kMillisecond);
  net.ntt[0][2] = net.ntt[2][0] = 100 * kMillisecond;
  auto h = cops(3, 2, net);
  auto a = h.client(0);
  auto b = h.client(1);
  const auto y = h.put(a, key_on(1, 2), 1);
  h.kernel.run_until(h.kernel.now() + 15 * kMillisecond);
  ASSERT_EQ(h.get(b, key_on(1, 2)).value, 1u);
  const auto x = h.put(b, key_on(0, 2), 2);

  h.kernel.run_until(h.trace.at(x.version).created + 11 * kMillisecond);
  EXPECT_EQ(h.as<Cops>().parked_checks(NodeId{2, 1}), 1u);
  EXPECT_EQ(h.as<Cops>().pending_put_afters(NodeId{2, 0}), 1u);
  EXPECT_FALSE(h.trace.at(x.version).visible_at[2]);

  h.kernel.run_until(h.kernel.now() + kSecond);
  const auto& vy = h.trace.at(y.version);
  const auto& vx = h.trace.at(x.version);
  ASSERT_TRUE(vy.visible_at[2] && vx.visible_at[2]);
  EXPECT_EQ(*vy.visible_at[2], vy.created + 100 * kMillisecond);
  // The parked check is answered by the event that installs y.
  EXPECT_EQ(*vx.visible_at[2], *vy.visible_at[2] + kIntra);
  EXPECT_EQ(h.as<Cops>().parked_checks(NodeId{2, 1}), 0u);
  EXPECT_TRUE(consistency::check_dependency_visibility(h.trace).satisfied);
}

TEST(Cops, CrashedCheckerBlocksRemoteVisibility) {
  FaultSchedule f;
  f.crashes.push_back({NodeId{1, 1}, 0, 10 * kSecond});
  Harness h(ProtocolKind::cops, test::topology(2, 2), NetworkModel::uniform(2, kNtt), {}, f);
  auto c = h.client(0);
  h.put(c, key_on(1, 2), 1);
  const auto x = h.put(c, key_on(0, 2), 2);
  h.kernel.run_until(h.kernel.now() + kSecond);
  EXPECT_FALSE(h.trace.at(x.version).visible_at[1]);
  EXPECT_EQ(h.as<Cops>().pending_put_afters(NodeId{1, 0}), 1u);
}

TEST(Cops, VersionsIncreasePerNode) {
  auto h = cops(1, 1);
  auto c = h.client(0);
  LamportStamp last{};
  for (Value v = 1; v <= 10; ++v) {
    const auto w = h.put(c, v % 3, v);
    EXPECT_LT(last, w.cops_ver);
    last = w.cops_ver;
  }
}

}  // namespace
}  // namespace clab::proto
