// Acceptance harness: one pass/fail line per criterion, exit 0 only if all pass.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "cpts/cpts.hpp"

using namespace cpts;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << '\n';
    if (!ok) ++failures;
}

bool throughput() {
    GenParams p;
    p.depth = 5;
    auto t0 = std::chrono::steady_clock::now();
    std::vector<CptNode> batch = generate_batch(p, 2500);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    std::size_t nodes = 0;
    for (const CptNode& t : batch) nodes += static_cast<std::size_t>(stats(t).node_count);
    std::ostringstream d;
    d << "2500 trees in " << ms << " ms, " << nodes << " nodes";
    report("generator throughput: 2500 depth-5 trees under 10 s", ms < 10000 && nodes > 0,
           d.str());
    if (ms >= 2000)
        std::cout << "       note: above the 2 s target, within the hard limit\n";
    return ms < 10000;
}

bool soundness() {
    GenParams p;
    for (int depth : {2, 3, 4, 5}) {
        p.depth = depth;
        for (std::uint64_t seed = 0; seed < 2500; ++seed) {
            p.seed = seed;
            CptNode t = generate_cpt(p);
            if (!validate(t).empty() || stats(t).depth > depth) {
                std::ostringstream d;
                d << "depth " << depth << " seed " << seed;
                report("soundness: 10,000 seeds yield valid trees within the depth bound", false,
                       d.str());
                return false;
            }
        }
    }
    report("soundness: 10,000 seeds yield valid trees within the depth bound", true,
           "4 depths x 2500 seeds");
    return true;
}

bool splice_preserves_traces() {
    GenParams p;
    p.depth = 3;
    p.p_zero = 0.45;
    auto node_count = [](const CptNode& n) {
        auto rec = [](const CptNode& n, auto&& self) -> int {
            int c = 1;
            for (const CptNode& ch : n.children) c += self(ch, self);
            return c;
        };
        return rec(n, rec);
    };
    int checked = 0;
    for (std::uint64_t seed = 0; checked < 500 && seed < 100000; ++seed) {
        p.seed = seed;
        Rng rng(p.seed);
        ShapeNode shape = random_tree(p, rng);
        CptNode rough = assign_elements(shape, rng);
        if (node_count(rough) > 12) continue;
        CptNode spliced = splice_nested(rough);
        try {
            if (!trace_equivalent(rough, spliced, 2, kDefaultTraceCap, false)) {
                report("rationalization: nested-splice preserves bounded trace sets", false,
                       "seed " + std::to_string(seed));
                return false;
            }
        } catch (const BoundExceeded&) {
            continue;  // enumeration cap hit; this shape does not count
        }
        ++checked;
    }
    report("rationalization: nested-splice preserves bounded trace sets", checked == 500,
           std::to_string(checked) + " rough trees, loop bound 2");
    return checked == 500;
}

bool round_trip() {
    GenParams p;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        p.seed = seed;
        CptNode t = generate_cpt(p);
        for (NotationStyle style : {NotationStyle::Ascii, NotationStyle::Unicode}) {
            std::string text = serialize(t, style);
            if (!(parse(text) == t) || serialize(parse(text), style) != text) {
                report("notation: serialize/parse round trip in both styles", false,
                       "seed " + std::to_string(seed));
                return false;
            }
        }
    }
    report("notation: serialize/parse round trip in both styles", true, "10,000 trees");
    return true;
}

bool back_parse_oracle() {
    RuleRenderer rule;
    GenParams p;
    p.depth = 6;
    p.p_zero = 0.25;
    int deep = 0, wide = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        p.seed = seed;
        CptNode t = generate_cpt(p);
        TreeStats s = stats(t);
        if (s.depth >= 3) ++deep;
        if (s.node_count > 15) ++wide;
        Sketch sketch = generate_bpts(t, rule);
        if (!(back_parse(sketch.text) == t)) {
            report("sketch: rule-rendered text back-parses to the source tree", false,
                   "seed " + std::to_string(seed));
            return false;
        }
    }
    std::ostringstream d;
    d << "1000 trees, " << deep << " with nesting >= 3, " << wide << " with > 15 nodes";
    bool ok = deep > 0 && wide > 0;
    report("sketch: rule-rendered text back-parses to the source tree", ok, d.str());
    return ok;
}

bool suite_reproduction() {
    SuiteSpec spec;
    std::vector<SuiteEntry> suite = build_suite(spec, GenParams{}, 1);
    std::map<SuiteCategory, int> counts;
    for (const SuiteEntry& e : suite) counts[e.category] += 1;
    bool ok = suite.size() == 100 && counts[SuiteCategory::Depth2] == 10 &&
              counts[SuiteCategory::Depth3] == 20 && counts[SuiteCategory::Depth4] == 20 &&
              counts[SuiteCategory::Depth5] == 20 &&
              counts[SuiteCategory::MultilayerLoop] == 10 &&
              counts[SuiteCategory::MultilayerSelection] == 10 &&
              counts[SuiteCategory::ManyNodes] == 10;
    if (ok) {
        SuiteStats s = suite_stats(suite);
        ok = s.max_nodes >= s.min_nodes && s.max_activities >= s.min_activities &&
             s.max_operators >= s.min_operators && s.multilayer_loop_count >= 10 &&
             s.multilayer_selection_count >= 10;
    }
    report("evaluation: suite composition 10/20/20/20/10/10/10 with coherent statistics", ok);
    return ok;
}

bool offline_dataset() {
    namespace fs = std::filesystem;
    auto read_all = [](const fs::path& p) {
        std::ifstream in(p);
        std::stringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    fs::path a = fs::temp_directory_path() / "cpts_accept_a.jsonl";
    fs::path b = fs::temp_directory_path() / "cpts_accept_b.jsonl";
    GenParams p;
    p.seed = 12;
    ProduceOptions opts;
    opts.now = [] { return std::int64_t{1700000000000}; };
    opts.log = nullptr;
    std::size_t network = 0;
    std::size_t produced = 0;
    for (const fs::path& path : {a, b}) {
        fs::remove(path);
        CompletionClient client({.mock = true}, ModelParams{});
        LlmRenderer renderer(client);
        produced = produce_dataset(p, 100, renderer, path.string(), opts).produced;
        network += client.network_calls();
    }
    bool ok = produced == 100 && network == 0 && read_all(a) == read_all(b) &&
              !read_all(a).empty();
    fs::remove(a);
    fs::remove(b);
    report("dataset: 100-record mock run is offline and byte-identical on rerun", ok);
    return ok;
}

bool score_aggregation() {
    double acc = aggregate_scores({{"r1", "e1", 1.0}, {"r1", "e2", 1.0}, {"r1", "e3", 0.5}});
    bool ok = std::abs(acc - 83.33) <= 0.01;
    std::vector<ScoreRow> rows;
    for (int r = 0; r < 30 && ok; ++r)
        for (int e = 1; e <= 3; ++e)
            rows.push_back({"r" + std::to_string(r), "e" + std::to_string(e),
                            (r * 7 + e) % 3 / 2.0});
    double base = aggregate_scores(rows);
    std::mt19937 shuffler(7);
    for (int i = 0; i < 100 && ok; ++i) {
        std::shuffle(rows.begin(), rows.end(), shuffler);
        ok = std::abs(aggregate_scores(rows) - base) < 1e-9;
    }
    std::ostringstream d;
    d << "[1,1,0.5] -> " << acc << "; 100 shuffles stable";
    report("evaluation: score aggregation matches hand arithmetic and is order-invariant", ok,
           d.str());
    return ok;
}

}  // namespace

int main() {
    throughput();
    soundness();
    splice_preserves_traces();
    round_trip();
    back_parse_oracle();
    suite_reproduction();
    offline_dataset();
    score_aggregation();
    std::cout << "[INFO] external-model quality comparison requires live endpoint access and "
                 "human scoring; not checked here\n";
    if (failures) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
