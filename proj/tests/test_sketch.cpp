#include <catch2/catch_amalgamated.hpp>

#include "cpts/generator.hpp"
#include "cpts/notation.hpp"
#include "cpts/semantics.hpp"
#include "cpts/sketch.hpp"

using namespace cpts;

namespace {

CptNode figure_tree() { return parse("seq(a_1,xor_c_1(loop(c_2,a_4),par(a_2,a_3)))"); }

// Counts merge calls to check the one-call-per-operator invariant.
class CountingRenderer final : public Renderer {
  public:
    std::string id() const override { return "counting"; }
    std::string render(OperatorKind op, const std::vector<std::string>& subs,
                       const std::optional<std::string>& cond) override {
        ++calls;
        return rule_render(op, subs, cond);
    }
    int calls = 0;
};

class FailingRenderer final : public Renderer {
  public:
    std::string id() const override { return "failing"; }
    std::string render(OperatorKind, const std::vector<std::string>&,
                       const std::optional<std::string>&) override {
        throw std::runtime_error("boom");
    }
};

}  // namespace

TEST_CASE("render_leaf") {
    CHECK(render_leaf(activity(1)) == "execute activity a_1");
    CHECK(render_leaf(condition(2)) == "c_2");
    CHECK(render_leaf(CptNode{Element::silent(), {}}).empty());
    CHECK_THROWS_AS(render_leaf(seq({activity(1), activity(2)})), NotALeaf);
}

TEST_CASE("construct_prompt fills the per-operator templates") {
    PromptRecord rec = construct_prompt(
        OperatorKind::Exclusive, {"execute activity a_1", "execute activity a_2"}, "c_1");
    CHECK(rec.input_block == "if c_1 then: execute activity a_1 else: execute activity a_2");
    CHECK(rec.instruction ==
          "Cover the input into fluent natural language without changing its meaning");

    PromptRecord s = construct_prompt(OperatorKind::Sequence, {"x", "y", "z"}, std::nullopt);
    CHECK(s.input_block == "do in order: 1. x 2. y 3. z");
    PromptRecord p = construct_prompt(OperatorKind::Parallel, {"x", "y"}, std::nullopt);
    CHECK(p.input_block == "do all of the following at the same time: 1. x 2. y");
    PromptRecord l = construct_prompt(OperatorKind::Loop, {"x"}, "c_3");
    CHECK(l.input_block == "while c_3 holds, repeatedly: x; stop when c_3 no longer holds");
}

TEST_CASE("construct_prompt arity and condition checks") {
    CHECK_THROWS_AS(construct_prompt(OperatorKind::Sequence, {"x"}, std::nullopt), ArityMismatch);
    CHECK_THROWS_AS(construct_prompt(OperatorKind::Exclusive, {"x", "y"}, std::nullopt),
                    MissingCondition);
    CHECK_THROWS_AS(construct_prompt(OperatorKind::Loop, {"x", "y"}, "c_1"), ArityMismatch);
}

TEST_CASE("instruction is byte-identical across records") {
    std::string first;
    for (auto op : {OperatorKind::Sequence, OperatorKind::Parallel}) {
        PromptRecord rec = construct_prompt(op, {"x", "y"}, std::nullopt);
        if (first.empty()) first = rec.instruction;
        CHECK(rec.instruction == first);
    }
    CHECK(first == std::string(kInstruction));
}

TEST_CASE("template file parsing matches the built-in defaults") {
    TemplateSet parsed = TemplateSet::parse(TemplateSet::kDefaultText);
    CHECK(parsed.expand(OperatorKind::Loop, {"b"}, "c_1") ==
          TemplateSet::defaults().expand(OperatorKind::Loop, {"b"}, "c_1"));
    CHECK(parsed.checksum() == TemplateSet::defaults().checksum());
    CHECK_FALSE(parsed.checksum().empty());
    CHECK_THROWS_WITH(TemplateSet::parse("[sequence]\nx\n"),
                      Catch::Matchers::ContainsSubstring("missing section"));
}

TEST_CASE("rule_render golden strings") {
    CHECK(rule_render(OperatorKind::Sequence,
                      {"execute activity a_1", "execute activity a_2"}) ==
          "First, execute activity a_1. Then, execute activity a_2.");
    CHECK(rule_render(OperatorKind::Loop, {"execute activity a_4"}, "c_2") ==
          "While condition c_2 is satisfied, repeatedly execute activity a_4; once c_2 is not "
          "met, the loop ends.");
    CHECK(rule_render(OperatorKind::Exclusive,
                      {"execute activity a_1", "execute activity a_2"}, "c_1") ==
          "If condition c_1 is met, execute activity a_1. Otherwise, execute activity a_2.");
    std::string par_text = rule_render(OperatorKind::Parallel, {"x", "y"});
    CHECK(par_text.find("x") != std::string::npos);
    CHECK(par_text.find("y") != std::string::npos);
}

TEST_CASE("generate_bpts on a single leaf") {
    RuleRenderer rule;
    Sketch s = generate_bpts(activity(1), rule);
    CHECK(s.text == "execute activity a_1");
    CHECK(s.node_sketches.empty());
    CHECK(s.renderer_id == "rule");
}

TEST_CASE("generate_bpts structural content on the example tree") {
    RuleRenderer rule;
    CptNode t = figure_tree();
    Sketch s = generate_bpts(t, rule);
    // a_1 appears before the branch; both parallel activities present;
    // each condition exactly once.
    CHECK(s.text.find("a_1") < s.text.find("c_1"));
    CHECK(s.text.find("a_2") != std::string::npos);
    CHECK(s.text.find("a_3") != std::string::npos);
    CHECK(s.text.find("a_4") != std::string::npos);
    auto count = [&](const std::string& needle) {
        std::size_t hits = 0;
        for (std::size_t at = 0; (at = s.text.find(needle, at)) != std::string::npos;
             at += needle.size())
            ++hits;
        return hits;
    };
    CHECK(count("c_1") == 1);
    CHECK(count("c_2") == 2);  // loop template names its condition opening and closing
    CHECK(count("a_1") == 1);
    CHECK(back_parse(s.text) == t);
}

TEST_CASE("node_sketches covers exactly the operator nodes") {
    RuleRenderer rule;
    CptNode t = figure_tree();
    Sketch s = generate_bpts(t, rule);
    CHECK(s.node_sketches.size() == static_cast<std::size_t>(stats(t).operator_count));
    CHECK(s.node_sketches.count(""));   // root
    CHECK(s.node_sketches.count("1"));  // exclusive
    CHECK(s.node_sketches.count("1.0"));
    CHECK(s.node_sketches.count("1.1"));
}

TEST_CASE("renderer failures carry the node path") {
    FailingRenderer failing;
    try {
        generate_bpts(figure_tree(), failing);
        FAIL("expected RendererFailure");
    } catch (const RendererFailure& e) {
        CHECK_FALSE(e.path().empty());
    }
}

TEST_CASE("one merge call per operator node") {
    CountingRenderer counting;
    CptNode t = figure_tree();
    generate_bpts(t, counting);
    CHECK(counting.calls == stats(t).operator_count);

    counting.calls = 0;
    generate_bpts(activity(1), counting);
    CHECK(counting.calls == 0);
}

TEST_CASE("back_parse basics") {
    CHECK(back_parse("execute activity a_1") == activity(1));
    CHECK_THROWS_AS(back_parse("the clerk reviews the loan application"), BackParseError);
    CHECK_THROWS_AS(back_parse(""), BackParseError);
}

TEST_CASE("activity multiset is preserved by the rule renderer") {
    RuleRenderer rule;
    GenParams p;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        p.seed = seed;
        CptNode t = generate_cpt(p);
        Sketch s = generate_bpts(t, rule);
        CptNode round = back_parse(s.text);
        CHECK(round == t);
    }
}

TEST_CASE("condition labels appear in rule-rendered text") {
    RuleRenderer rule;
    CptNode t = parse("seq(loop(c_5,a_1),xor_c_9(a_2,a_3))");
    Sketch s = generate_bpts(t, rule);
    CHECK(s.text.find("c_5") != std::string::npos);
    CHECK(s.text.find("c_9") != std::string::npos);
}

TEST_CASE("changing one subtree only changes sketches on its root path") {
    RuleRenderer rule;
    CptNode t1 = parse("seq(a_1,xor_c_1(loop(c_2,a_4),par(a_2,a_3)))");
    CptNode t2 = parse("seq(a_1,xor_c_1(loop(c_2,a_9),par(a_2,a_3)))");
    Sketch s1 = generate_bpts(t1, rule);
    Sketch s2 = generate_bpts(t2, rule);
    REQUIRE(s1.node_sketches.size() == s2.node_sketches.size());
    // changed leaf is at path 1.0.1; its ancestors are 1.0, 1, root
    for (const auto& [path, text] : s1.node_sketches) {
        bool on_path = path.empty() || path == "1" || path == "1.0";
        if (on_path)
            CHECK(text != s2.node_sketches.at(path));
        else
            CHECK(text == s2.node_sketches.at(path));
    }
}

TEST_CASE("back_parse round-trips deeply nested and wide trees") {
    RuleRenderer rule;
    GenParams p;
    p.depth = 7;
    p.p_zero = 0.25;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        p.seed = seed;
        CptNode t = generate_cpt(p);
        Sketch s = generate_bpts(t, rule);
        REQUIRE(back_parse(s.text) == t);
    }
}

TEST_CASE("back-parsed trees are trace equivalent to the source") {
    RuleRenderer rule;
    GenParams p;
    p.depth = 4;
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        p.seed = seed;
        CptNode t = generate_cpt(p);
        Sketch s = generate_bpts(t, rule);
        try {
            bool equivalent = trace_equivalent(back_parse(s.text), t, 2);
            CHECK(equivalent);
            ++checked;
        } catch (const BoundExceeded&) {
            // wide parallel sections exceed the enumeration cap; skip
        }
    }
    CHECK(checked >= 20);
}
