#pragma once

// CPT-BPTS pair production as append-only JSONL with sub-seed-keyed ids,
// so interrupted runs resume idempotently; plus the corpus summary
// report.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpts/core.hpp"
#include "cpts/generator.hpp"
#include "cpts/model_params.hpp"
#include "cpts/notation.hpp"
#include "cpts/rng.hpp"
#include "cpts/sketch.hpp"

namespace cpts {

class SinkError : public std::runtime_error {
  public:
    explicit SinkError(const std::string& what) : std::runtime_error(what) {}
};
class EmptyDataset : public std::runtime_error {
  public:
    explicit EmptyDataset(const std::string& what) : std::runtime_error(what) {}
};
class CorruptRecord : public std::runtime_error {
  public:
    CorruptRecord(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

inline void to_json(nlohmann::json& j, const TreeStats& s) {
    j = {{"depth", s.depth},
         {"node_count", s.node_count},
         {"activity_count", s.activity_count},
         {"operator_count", s.operator_count},
         {"max_selection_nesting", s.max_selection_nesting},
         {"max_loop_nesting", s.max_loop_nesting}};
}

inline void from_json(const nlohmann::json& j, TreeStats& s) {
    j.at("depth").get_to(s.depth);
    j.at("node_count").get_to(s.node_count);
    j.at("activity_count").get_to(s.activity_count);
    j.at("operator_count").get_to(s.operator_count);
    j.at("max_selection_nesting").get_to(s.max_selection_nesting);
    j.at("max_loop_nesting").get_to(s.max_loop_nesting);
}

inline void to_json(nlohmann::json& j, const GenParams& p) {
    j = {{"depth", p.depth},   {"p_zero", p.p_zero},   {"p_two", p.p_two},
         {"num_low", p.num_low}, {"num_up", p.num_up}, {"seed", p.seed}};
}

inline void from_json(const nlohmann::json& j, GenParams& p) {
    p.depth = j.value("depth", p.depth);
    p.p_zero = j.value("p_zero", p.p_zero);
    p.p_two = j.value("p_two", p.p_two);
    p.num_low = j.value("num_low", p.num_low);
    p.num_up = j.value("num_up", p.num_up);
    p.seed = j.value("seed", p.seed);
}

inline void to_json(nlohmann::json& j, const ModelParams& p) {
    j = {{"model_id", p.model_id}, {"temperature", p.temperature}, {"top_p", p.top_p},
         {"n", p.n}};
}

struct DatasetRecord {
    std::string id;  // derived sub-seed in hex
    std::string cpt;
    std::string bpts;
    TreeStats tree_stats;
    std::string renderer_id;
    std::optional<ModelParams> model_params;
    GenParams gen_params;  // includes the per-record sub-seed
    std::uint64_t root_seed = 0;
    std::string template_checksum;
    std::int64_t created_at = 0;  // unix epoch milliseconds
};

inline void to_json(nlohmann::json& j, const DatasetRecord& r) {
    j = {{"id", r.id},
         {"cpt", r.cpt},
         {"bpts", r.bpts},
         {"stats", r.tree_stats},
         {"renderer_id", r.renderer_id},
         {"gen_params", r.gen_params},
         {"root_seed", r.root_seed},
         {"template_checksum", r.template_checksum},
         {"created_at", r.created_at}};
    if (r.model_params) j["model_params"] = *r.model_params;
}

inline void from_json(const nlohmann::json& j, DatasetRecord& r) {
    j.at("id").get_to(r.id);
    j.at("cpt").get_to(r.cpt);
    j.at("bpts").get_to(r.bpts);
    j.at("stats").get_to(r.tree_stats);
    j.at("renderer_id").get_to(r.renderer_id);
    j.at("gen_params").get_to(r.gen_params);
    r.root_seed = j.value("root_seed", std::uint64_t{0});
    r.template_checksum = j.value("template_checksum", "");
    r.created_at = j.value("created_at", std::int64_t{0});
}

inline std::string subseed_hex(std::uint64_t subseed) {
    std::ostringstream out;
    out << std::hex << subseed;
    return out.str();
}

struct ProduceOptions {
    bool resume = false;
    std::function<std::int64_t()> now = [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    };
    std::ostream* log = &std::cerr;
};

struct ProduceSummary {
    std::size_t produced = 0;
    std::size_t failures = 0;
    std::size_t skipped_existing = 0;
};

namespace detail {

inline std::set<std::string> existing_ids(const std::string& path) {
    std::set<std::string> ids;
    std::ifstream in(path);
    if (!in) return ids;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (!j.is_discarded() && j.contains("id")) ids.insert(j["id"].get<std::string>());
    }
    return ids;
}

}  // namespace detail

inline ProduceSummary produce_dataset(const GenParams& gen, std::size_t n, Renderer& renderer,
                                      const std::string& out_path,
                                      const ProduceOptions& opts = {}) {
    gen.check();
    if (n < 1) throw InvalidParams("dataset size must be >= 1");
    std::set<std::string> seen;
    if (opts.resume) seen = detail::existing_ids(out_path);
    std::ofstream out(out_path, std::ios::app);
    if (!out) throw SinkError("cannot open '" + out_path + "' for append");

    ProduceSummary summary;
    for (std::size_t i = 0; i < n; ++i) {
        GenParams sub = gen;
        sub.seed = derive_subseed(gen.seed, i);
        std::string id = subseed_hex(sub.seed);
        if (seen.count(id)) {
            ++summary.skipped_existing;
            continue;
        }
        CptNode tree = generate_cpt(sub);
        DatasetRecord rec;
        rec.id = id;
        rec.cpt = serialize(tree, NotationStyle::Ascii);
        rec.tree_stats = stats(tree);
        rec.gen_params = sub;
        rec.root_seed = gen.seed;
        rec.created_at = opts.now();
        try {
            Sketch sketch = generate_bpts(tree, renderer);
            rec.bpts = sketch.text;
            rec.renderer_id = sketch.renderer_id;
            rec.template_checksum = sketch.template_checksum;
        } catch (const std::exception& e) {
            ++summary.failures;
            if (opts.log) *opts.log << "record " << id << " failed: " << e.what() << '\n';
            out << nlohmann::json{{"id", id}, {"error", e.what()}}.dump() << '\n';
            continue;
        }
        out << nlohmann::json(rec).dump() << '\n';
        if (!out) throw SinkError("write to '" + out_path + "' failed");
        ++summary.produced;
    }
    return summary;
}

struct DatasetReport {
    std::size_t record_count = 0;
    std::size_t failure_count = 0;
    int max_nodes = 0, min_nodes = 0;
    int max_activities = 0, min_activities = 0;
    int max_operators = 0, min_operators = 0;
    int max_depth = 0;
};

inline DatasetReport dataset_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SinkError("cannot open dataset '" + path + "'");
    DatasetReport report;
    report.min_nodes = report.min_activities = report.min_operators =
        std::numeric_limits<int>::max();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw CorruptRecord(lineno, "not valid JSON");
        if (j.contains("error")) {
            ++report.failure_count;
            continue;
        }
        DatasetRecord rec;
        try {
            rec = j.get<DatasetRecord>();
        } catch (const nlohmann::json::exception& e) {
            throw CorruptRecord(lineno, e.what());
        }
        ++report.record_count;
        const TreeStats& s = rec.tree_stats;
        report.max_nodes = std::max(report.max_nodes, s.node_count);
        report.min_nodes = std::min(report.min_nodes, s.node_count);
        report.max_activities = std::max(report.max_activities, s.activity_count);
        report.min_activities = std::min(report.min_activities, s.activity_count);
        report.max_operators = std::max(report.max_operators, s.operator_count);
        report.min_operators = std::min(report.min_operators, s.operator_count);
        report.max_depth = std::max(report.max_depth, s.depth);
    }
    if (report.record_count == 0 && report.failure_count == 0)
        throw EmptyDataset("dataset '" + path + "' has no records");
    return report;
}

}  // namespace cpts
