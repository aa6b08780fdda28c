#pragma once

// Test-suite construction (category quotas via rejection sampling), the
// single-shot six-section baseline prompt, suite statistics, and human
// score aggregation.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpts/core.hpp"
#include "cpts/generator.hpp"
#include "cpts/notation.hpp"
#include "cpts/rng.hpp"
#include "cpts/sketch.hpp"

namespace cpts {

class QuotaUnreachable : public std::runtime_error {
  public:
    explicit QuotaUnreachable(const std::string& what) : std::runtime_error(what) {}
};
class EmptySuite : public std::runtime_error {
  public:
    explicit EmptySuite(const std::string& what) : std::runtime_error(what) {}
};

enum class SuiteCategory { Depth2, Depth3, Depth4, Depth5, MultilayerLoop, MultilayerSelection, ManyNodes };

inline const char* category_name(SuiteCategory c) {
    switch (c) {
        case SuiteCategory::Depth2: return "depth2";
        case SuiteCategory::Depth3: return "depth3";
        case SuiteCategory::Depth4: return "depth4";
        case SuiteCategory::Depth5: return "depth5";
        case SuiteCategory::MultilayerLoop: return "multilayer_loop";
        case SuiteCategory::MultilayerSelection: return "multilayer_selection";
        case SuiteCategory::ManyNodes: return "many_nodes";
    }
    return "?";
}

struct SuiteSpec {
    int depth2 = 10;
    int depth3 = 20;
    int depth4 = 20;
    int depth5 = 20;
    int multilayer_loop = 10;
    int multilayer_selection = 10;
    int many_nodes = 10;
    int node_threshold = 15;  // many_nodes: node_count > threshold

    int total() const {
        return depth2 + depth3 + depth4 + depth5 + multilayer_loop + multilayer_selection +
               many_nodes;
    }
};

struct SuiteEntry {
    std::string id;
    SuiteCategory category;
    CptNode tree;
    TreeStats stats;
};

inline bool category_matches(SuiteCategory c, const TreeStats& s, const SuiteSpec& spec) {
    switch (c) {
        case SuiteCategory::Depth2: return s.depth == 2;
        case SuiteCategory::Depth3: return s.depth == 3;
        case SuiteCategory::Depth4: return s.depth == 4;
        case SuiteCategory::Depth5: return s.depth == 5;
        case SuiteCategory::MultilayerLoop: return s.max_loop_nesting >= 2;
        case SuiteCategory::MultilayerSelection: return s.max_selection_nesting >= 2;
        case SuiteCategory::ManyNodes: return s.node_count > spec.node_threshold;
    }
    return false;
}

// Rejection-samples trees until every category quota is filled. A tree
// is filed under the first (in table row order) still-unfilled category
// it matches, keeping categories disjoint.
inline std::vector<SuiteEntry> build_suite(const SuiteSpec& spec, const GenParams& gen,
                                           std::uint64_t seed,
                                           std::size_t sample_budget = 2'000'000) {
    gen.check();
    const SuiteCategory order[] = {
        SuiteCategory::Depth2,         SuiteCategory::Depth3,
        SuiteCategory::Depth4,         SuiteCategory::Depth5,
        SuiteCategory::MultilayerLoop, SuiteCategory::MultilayerSelection,
        SuiteCategory::ManyNodes};
    std::map<SuiteCategory, int> quota = {
        {SuiteCategory::Depth2, spec.depth2},
        {SuiteCategory::Depth3, spec.depth3},
        {SuiteCategory::Depth4, spec.depth4},
        {SuiteCategory::Depth5, spec.depth5},
        {SuiteCategory::MultilayerLoop, spec.multilayer_loop},
        {SuiteCategory::MultilayerSelection, spec.multilayer_selection},
        {SuiteCategory::ManyNodes, spec.many_nodes}};
    std::vector<SuiteEntry> out;
    int remaining = spec.total();
    for (std::size_t i = 0; remaining > 0; ++i) {
        if (i >= sample_budget) {
            for (SuiteCategory c : order)
                if (quota[c] > 0)
                    throw QuotaUnreachable(std::string("sample budget exhausted; category '") +
                                           category_name(c) + "' still needs " +
                                           std::to_string(quota[c]) + " tree(s)");
        }
        GenParams sub = gen;
        sub.seed = derive_subseed(seed, i);
        CptNode tree = generate_cpt(sub);
        TreeStats s = stats(tree);
        for (SuiteCategory c : order) {
            if (quota[c] > 0 && category_matches(c, s, spec)) {
                quota[c] -= 1;
                remaining -= 1;
                std::ostringstream id;
                id << category_name(c) << "-" << std::hex << sub.seed;
                out.push_back({id.str(), c, std::move(tree), s});
                break;
            }
        }
    }
    return out;
}

struct SuiteStats {
    int max_activities = 0, min_activities = 0;
    int max_nodes = 0, min_nodes = 0;
    int max_operators = 0, min_operators = 0;
    int multilayer_selection_count = 0;  // selection nesting >= 2
    int multilayer_loop_count = 0;       // loop nesting >= 2
};

inline SuiteStats suite_stats(const std::vector<SuiteEntry>& suite) {
    if (suite.empty()) throw EmptySuite("suite_stats: suite is empty");
    SuiteStats out;
    out.min_activities = out.min_nodes = out.min_operators = std::numeric_limits<int>::max();
    for (const SuiteEntry& e : suite) {
        out.max_activities = std::max(out.max_activities, e.stats.activity_count);
        out.min_activities = std::min(out.min_activities, e.stats.activity_count);
        out.max_nodes = std::max(out.max_nodes, e.stats.node_count);
        out.min_nodes = std::min(out.min_nodes, e.stats.node_count);
        out.max_operators = std::max(out.max_operators, e.stats.operator_count);
        out.min_operators = std::min(out.min_operators, e.stats.operator_count);
        if (e.stats.max_selection_nesting >= 2) out.multilayer_selection_count += 1;
        if (e.stats.max_loop_nesting >= 2) out.multilayer_loop_count += 1;
    }
    return out;
}

// ---- Traditional single-shot baseline prompt (six fixed sections) ----

struct BaselineTemplate {
    // Section bodies; the six headers are fixed. {examples} in the
    // example section expands to few_shot_count input/output pairs.
    std::string instruction =
        "Convert the Conditional Process Tree (CPT) given at the end into one fluent business "
        "process text that preserves every activity and the order, choices, parallelism and "
        "loops of the tree.";
    std::string context =
        "A CPT is a tree over abstract activities (a_1, a_2, ...) and conditions (c_1, c_2, "
        "...). Operators: seq(x,y,...) executes children left to right; xor_c(x,y) executes x "
        "when condition c holds and y otherwise; par(x,y,...) executes all children "
        "simultaneously; loop(c,x) repeats x while condition c holds and stops once it does "
        "not.";
    std::string prompt_guard =
        "Mention every activity exactly once. Do not invent activities, do not turn sequential "
        "steps into parallel ones or parallel steps into sequential ones, and do not invert "
        "loop conditions.";
    std::string output_indicator = "Answer with a single plain-English paragraph and nothing else.";
    int few_shot_count = 2;

    std::string version_checksum() const {
        return fnv1a64_hex(instruction + "\x1f" + context + "\x1f" + prompt_guard + "\x1f" +
                           output_indicator + "\x1f" + std::to_string(few_shot_count));
    }
};

namespace detail {

inline std::vector<std::pair<std::string, std::string>> baseline_examples(int count) {
    // Fixed pool of small tree/text pairs (texts from the rule renderer).
    static const std::vector<std::string> pool = {
        "seq(a_1,a_2)",
        "xor_c_1(a_1,par(a_2,a_3))",
        "loop(c_1,seq(a_1,a_2))",
        "par(a_1,xor_c_1(a_2,a_3))",
    };
    RuleRenderer rule;
    std::vector<std::pair<std::string, std::string>> out;
    for (int i = 0; i < count && i < static_cast<int>(pool.size()); ++i)
        out.emplace_back(pool[i], generate_bpts(parse(pool[i]), rule).text);
    return out;
}

}  // namespace detail

inline std::string traditional_prompt(const CptNode& cpt,
                                      const BaselineTemplate& tmpl = BaselineTemplate{}) {
    std::string serialized = serialize(cpt, NotationStyle::Ascii);
    std::ostringstream out;
    out << "Instruction: " << tmpl.instruction << "\n\n";
    out << "Context: " << tmpl.context << "\n\n";
    out << "Prompt: " << tmpl.prompt_guard << "\n\n";
    out << "Example:";
    for (const auto& [tree, text] : detail::baseline_examples(tmpl.few_shot_count))
        out << "\nCPT: " << tree << "\nText: " << text;
    out << "\n\n";
    out << "Output Indicator: " << tmpl.output_indicator << "\n\n";
    out << "Conditional Process Tree: " << serialized;
    return out.str();
}

// ---- Score sheets ----

struct ScoreRow {
    std::string record_id;
    std::string evaluator_id;
    double score = 0.0;
};

inline const char* score_sheet_header() {
    return "# Scoring rule: 1.0 if the text completely matches the tree, is unambiguous and "
           "fluent;\n"
           "# 0.0 if the text and the tree do not agree;\n"
           "# on ambiguity, score the probability of a correct reading (e.g. 0.5);\n"
           "# full correspondence but rough language: evaluator's judgment, above 0.5.\n"
           "record_id,evaluator_id,score";
}

// Blank sheet for human raters: one row per (record, evaluator).
inline void emit_score_sheet(std::ostream& out, const std::vector<std::string>& record_ids,
                             int evaluators = 3) {
    out << score_sheet_header() << '\n';
    for (const std::string& id : record_ids)
        for (int e = 1; e <= evaluators; ++e) out << id << ",e" << e << ",\n";
}

inline std::vector<ScoreRow> load_score_sheet(std::istream& in) {
    std::vector<ScoreRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string id, ev, score;
        std::getline(ls, id, ',');
        std::getline(ls, ev, ',');
        std::getline(ls, score);
        if (id == "record_id") continue;  // header
        if (score.empty()) continue;      // unfilled row
        double value;
        try {
            value = std::stod(score);
        } catch (const std::exception&) {
            throw std::runtime_error("score sheet line " + std::to_string(lineno) +
                                     ": bad score '" + score + "'");
        }
        rows.push_back({id, ev, value});
    }
    return rows;
}

// Per-record mean over evaluators, then mean over records, as a
// percentage.
inline double aggregate_scores(const std::vector<ScoreRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("aggregate_scores: no rows");
    std::map<std::string, std::pair<double, int>> per_record;
    for (const ScoreRow& r : rows) {
        if (r.score < 0.0 || r.score > 1.0)
            throw std::invalid_argument("score " + std::to_string(r.score) + " for record '" +
                                        r.record_id + "' is outside [0,1]");
        auto& [sum, count] = per_record[r.record_id];
        sum += r.score;
        count += 1;
    }
    double total = 0.0;
    for (const auto& [id, agg] : per_record) total += agg.first / agg.second;
    return total / static_cast<double>(per_record.size()) * 100.0;
}

}  // namespace cpts
