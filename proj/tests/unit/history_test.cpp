#include <gtest/gtest.h>

#include "clab/consistency/history.hpp"
#include "clab/consistency/history_io.hpp"
#include "clab/consistency/visibility.hpp"

namespace clab::consistency {
namespace {

TEST(History, OperationsInCallOrder) {
  History h;
  h.put_call(1, 5, 9, 100);
  h.get_call(2, 5, 101);
  h.get_response(2, 5, 9, 101);
  const auto ops = operations(h);
  ASSERT_EQ(ops.size(), 2u);
  EXPECT_EQ(ops[0].id, 100u);
  EXPECT_TRUE(ops[0].pending());
  EXPECT_EQ(ops[1].value, 9u);
  EXPECT_EQ(ops[1].resp_pos, 2u);
}

TEST(History, CompleteDropsPendingCalls) {
  History h;
  h.put_call(1, 5, 9, 100);
  h.get(2, 5, 0, 101);
  const auto c = complete(h);
  EXPECT_EQ(c.events.size(), 2u);
  EXPECT_EQ(c.events[0].op_id, 101u);
}

TEST(History, ProcessSubhistory) {
  History h;
  h.put(1, 5, 9, 1);
  h.get(2, 5, 9, 2);
  h.get(1, 5, 9, 3);
  const auto s = process_subhistory(h, 1);
  ASSERT_EQ(s.events.size(), 4u);
  EXPECT_EQ(s.events[3].op_id, 3u);
}

TEST(History, FirstIllegalRead) {
  History h;
  h.put(1, 5, 9, 1);
  h.get(1, 5, 9, 2);
  h.get(1, 6, 3, 3);
  EXPECT_EQ(first_illegal_read(operations(h)), 2u);
  EXPECT_EQ(as_sequential(operations(h)), h);
}

TEST(History, RejectsMalformed) {
  History overlap;
  overlap.get_call(1, 5, 1);
  overlap.get_call(1, 5, 2);
  EXPECT_THROW(validate(overlap), MalformedHistory);

  History duplicate;
  duplicate.put(1, 5, 1, 7);
  duplicate.put(2, 5, 2, 7);
  EXPECT_THROW(validate(duplicate), MalformedHistory);

  History wrong_key;
  wrong_key.get_call(1, 5, 1);
  wrong_key.get_response(1, 6, 0, 1);
  EXPECT_THROW(validate(wrong_key), MalformedHistory);
}

TEST(HistoryIo, RoundTrip) {
  History h;
  h.put_call(3, 10, 77, 1);
  h.get_call(4, 10, 2);
  h.put_response(3, 10, 1);
  h.get_response(4, 10, 77, 2);
  const auto text = format_history(h);
  EXPECT_EQ(text,
            "0 3 call PUT 10 77 1\n"
            "1 4 call GET 10 2\n"
            "2 3 resp PUT 10 1\n"
            "3 4 resp GET 10 77 2\n");
  EXPECT_EQ(parse_history(text), h);
}

TEST(HistoryIo, CommentsAndGapsInSequence) {
  const auto h = parse_history("# header\n\n5 1 call GET 1 9\n8 1 resp GET 1 0 9\n");
  ASSERT_EQ(h.events.size(), 2u);
  EXPECT_EQ(h.events[1].value, 0u);
}

TEST(HistoryIo, ParseErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    try {
      parse_history(text);
    } catch (const HistoryParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  EXPECT_EQ(line_of("0 1 call GET 1 9\n1 1 resp GET 1 9\n"), 2u);        // missing value
  EXPECT_EQ(line_of("0 1 call PUT 1 9\n"), 1u);                         // missing value
  EXPECT_EQ(line_of("0 1 call GET 1 4 9\n"), 1u);                       // unexpected value
  EXPECT_EQ(line_of("3 1 call GET 1 9\n3 1 resp GET 1 0 9\n"), 2u);     // sequence repeats
  EXPECT_EQ(line_of("0 1 invoke GET 1 9\n"), 1u);
  EXPECT_EQ(line_of("0 1 call DEL 1 9\n"), 1u);
  EXPECT_EQ(line_of("0 x call GET 1 9\n"), 1u);
  EXPECT_EQ(line_of("0 1 call\n"), 1u);
}

TEST(Visibility, DependencyVisibleFirstIsFine) {
  VisibilityTrace t(2);
  const auto a = t.add_version(1, 10, NodeId{0, 0}, 100, {});
  const auto b = t.add_version(2, 20, NodeId{0, 1}, 200, {a});
  t.mark_visible(a, 1, 300);
  t.mark_visible(b, 1, 300);
  EXPECT_TRUE(check_dependency_visibility(t).satisfied);
}

TEST(Visibility, DependencyVisibleLaterIsViolation) {
  VisibilityTrace t(2);
  const auto a = t.add_version(1, 10, NodeId{0, 0}, 100, {});
  const auto b = t.add_version(2, 20, NodeId{0, 1}, 200, {a});
  t.mark_visible(b, 1, 300);
  t.mark_visible(a, 1, 301);
  const auto v = check_dependency_visibility(t);
  ASSERT_FALSE(v.satisfied);
  ASSERT_EQ(v.dependency_violations.size(), 1u);
  EXPECT_EQ(v.dependency_violations[0].version, b);
  EXPECT_EQ(v.dependency_violations[0].dependency, a);
  EXPECT_EQ(v.dependency_violations[0].dc, 1u);
}

TEST(Visibility, NeverVisibleDependency) {
  VisibilityTrace t(2);
  const auto a = t.add_version(1, 10, NodeId{0, 0}, 100, {});
  const auto b = t.add_version(2, 20, NodeId{0, 1}, 200, {a});
  t.mark_visible(b, 1, 300);
  EXPECT_FALSE(check_dependency_visibility(t).satisfied);
}

TEST(Visibility, MarkVisibleKeepsEarliest) {
  VisibilityTrace t(2);
  const auto a = t.add_version(1, 10, NodeId{0, 0}, 100, {});
  t.mark_visible(a, 1, 500);
  t.mark_visible(a, 1, 400);
  t.mark_visible(a, 1, 600);
  EXPECT_EQ(t.at(a).visible_at[1], 400u);
}

TEST(Eventual, ConvergedReplicas) {
  VisibilityTrace t(2);
  const auto a = t.add_version(1, 10, NodeId{0, 0}, 100, {});
  t.set_final_heads(1, {{NodeId{0, 0}, {a}}, {NodeId{1, 0}, {a}}});
  EXPECT_TRUE(check_eventual(t, 1000).satisfied);
}

TEST(Eventual, DivergentReplicas) {
  VisibilityTrace t(2);
  const auto a = t.add_version(1, 10, NodeId{0, 0}, 100, {});
  const auto b = t.add_version(1, 11, NodeId{1, 0}, 100, {});
  t.set_final_heads(1, {{NodeId{0, 0}, {a}}, {NodeId{1, 0}, {b}}});
  const auto v = check_eventual(t, 1000);
  ASSERT_FALSE(v.satisfied);
  ASSERT_EQ(v.divergent.size(), 1u);
}

TEST(Eventual, WritesAfterQuiescenceAreRejected) {
  VisibilityTrace t(1);
  t.add_version(1, 10, NodeId{0, 0}, 2000, {});
  EXPECT_THROW(check_eventual(t, 1000), NotQuiesced);
}

}  // namespace
}  // namespace clab::consistency
