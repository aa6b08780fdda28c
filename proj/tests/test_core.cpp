#include <catch2/catch_amalgamated.hpp>

#include "cpts/core.hpp"
#include "cpts/generator.hpp"
#include "cpts/notation.hpp"

using namespace cpts;

namespace {

CptNode figure_tree() { return parse("seq(a_1,xor_c_1(loop(c_2,a_4),par(a_2,a_3)))"); }

bool has_rule(const std::vector<Violation>& vs, const std::string& rule) {
    for (const auto& v : vs)
        if (v.rule == rule) return true;
    return false;
}

}  // namespace

TEST_CASE("single activity leaf is a valid tree") {
    CHECK(validate(activity(1)).empty());
}

TEST_CASE("sequence under sequence is flagged") {
    CptNode t = seq({activity(1), seq({activity(2), activity(3)})});
    auto vs = validate(t);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].rule == "seq-under-seq");
    CHECK(vs[0].path == "1");
}

TEST_CASE("parallel under parallel is flagged") {
    CptNode t = par({par({activity(1), activity(2)}), activity(3)});
    CHECK(has_rule(validate(t), "par-under-par"));
}

TEST_CASE("loop whose first child is an activity is flagged") {
    CptNode t = loop(activity(1), activity(2));
    auto vs = validate(t);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].rule == "loop-first-child-not-condition");
}

TEST_CASE("arity violations") {
    CptNode one_child_seq{Element::op_node(OperatorKind::Sequence), {activity(1)}};
    CHECK(has_rule(validate(one_child_seq), "seq-arity"));

    CptNode xor3{Element::op_node(OperatorKind::Exclusive, "c_1"),
                 {activity(1), activity(2), activity(3)}};
    CHECK(has_rule(validate(xor3), "xor-arity"));

    CptNode xor_nocond{Element::op_node(OperatorKind::Exclusive), {activity(1), activity(2)}};
    CHECK(has_rule(validate(xor_nocond), "xor-missing-condition"));

    CptNode leaf_kids{Element::activity("a_1"), {activity(2)}};
    CHECK(has_rule(validate(leaf_kids), "leaf-has-children"));
}

TEST_CASE("label patterns") {
    CHECK(is_activity_label("a_1"));
    CHECK(is_activity_label("a_42"));
    CHECK_FALSE(is_activity_label("a_0"));
    CHECK_FALSE(is_activity_label("a1"));
    CHECK_FALSE(is_activity_label("a_01"));
    CHECK_FALSE(is_activity_label("c_1"));
    CHECK(is_condition_label("c_7"));

    CptNode bad{Element::activity("b_1"), {}};
    CHECK(has_rule(validate(bad), "bad-activity-label"));
}

TEST_CASE("validate is idempotent") {
    CptNode t = figure_tree();
    auto a = validate(t);
    auto b = validate(t);
    CHECK(a.size() == b.size());
    CHECK(a.empty());
}

TEST_CASE("stats of the example tree") {
    TreeStats s = stats(figure_tree());
    CHECK(s.depth == 4);
    CHECK(s.node_count == 9);
    CHECK(s.activity_count == 4);
    CHECK(s.operator_count == 4);
    CHECK(s.max_selection_nesting == 1);
    CHECK(s.max_loop_nesting == 1);
}

TEST_CASE("stats of a single leaf") {
    TreeStats s = stats(activity(1));
    CHECK(s.depth == 1);
    CHECK(s.node_count == 1);
    CHECK(s.activity_count == 1);
    CHECK(s.operator_count == 0);
}

TEST_CASE("nested exclusive nesting count") {
    CptNode t = exclusive("c_1", exclusive("c_2", activity(1), activity(2)), activity(3));
    CHECK(stats(t).max_selection_nesting == 2);
}

TEST_CASE("stats rejects invalid trees") {
    CHECK_THROWS_AS(stats(loop(activity(1), activity(2))), InvalidTree);
}

TEST_CASE("silent leaf is representable") {
    CptNode t{Element::silent(), {}};
    CHECK(validate(t).empty());
    TreeStats s = stats(t);
    CHECK(s.activity_count == 0);
    CHECK(s.node_count == 1);
}

namespace {

int count_nodes(const CptNode& n) {
    int total = 1;
    for (const auto& c : n.children) total += count_nodes(c);
    return total;
}

}  // namespace

TEST_CASE("node_count is structurally recursive on random trees") {
    GenParams p;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        p.seed = seed;
        CptNode t = generate_cpt(p);
        CHECK(stats(t).node_count == count_nodes(t));
    }
}

TEST_CASE("generated trees validate and respect the depth bound") {
    GenParams p;
    p.depth = 4;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        p.seed = seed;
        CptNode t = generate_cpt(p);
        REQUIRE(validate(t).empty());
        CHECK(stats(t).depth <= p.depth);
    }
}
