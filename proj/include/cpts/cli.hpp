#pragma once

// Command-line front end. Subcommands: gen, convert, dataset, suite,
// baseline, stats, trace, validate. Resolution order for settings:
// flags > config file (--config) > environment > built-in defaults.
// Exit codes: 0 success, 1 input error, 2 environment/API error.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpts/core.hpp"
#include "cpts/dataset.hpp"
#include "cpts/evaluation.hpp"
#include "cpts/generator.hpp"
#include "cpts/http_transport.hpp"
#include "cpts/llm_client.hpp"
#include "cpts/notation.hpp"
#include "cpts/semantics.hpp"
#include "cpts/sketch.hpp"

namespace cpts::cli {

struct CliConfig {
    GenParams gen;
    ModelParams model;
    ClientConfig client;
    std::string template_path;
    int jobs = 0;  // 0: logical cores
};

inline void apply_config_json(const nlohmann::json& j, CliConfig& cfg) {
    if (j.contains("gen_params")) j.at("gen_params").get_to(cfg.gen);
    if (j.contains("base_url")) j.at("base_url").get_to(cfg.client.base_url);
    if (j.contains("model_id")) j.at("model_id").get_to(cfg.model.model_id);
    if (j.contains("temperature")) j.at("temperature").get_to(cfg.model.temperature);
    if (j.contains("top_p")) j.at("top_p").get_to(cfg.model.top_p);
    if (j.contains("n")) j.at("n").get_to(cfg.model.n);
    if (j.contains("requests_per_minute"))
        j.at("requests_per_minute").get_to(cfg.model.requests_per_minute);
    if (j.contains("max_retries")) j.at("max_retries").get_to(cfg.model.max_retries);
    if (j.contains("timeout_seconds")) j.at("timeout_seconds").get_to(cfg.model.timeout_seconds);
    if (j.contains("cache_dir")) j.at("cache_dir").get_to(cfg.client.cache_dir);
    if (j.contains("audit_log")) j.at("audit_log").get_to(cfg.client.audit_log_path);
    if (j.contains("single_user_message"))
        j.at("single_user_message").get_to(cfg.client.single_user_message);
    if (j.contains("template_path")) j.at("template_path").get_to(cfg.template_path);
}

// Secrets stay out: only the env var *name* is ever printed.
inline nlohmann::json config_to_json(const CliConfig& cfg) {
    return {{"gen_params", cfg.gen},
            {"model_id", cfg.model.model_id},
            {"temperature", cfg.model.temperature},
            {"top_p", cfg.model.top_p},
            {"n", cfg.model.n},
            {"base_url", cfg.client.base_url},
            {"api_key_env", cfg.client.api_key_env},
            {"cache_dir", cfg.client.cache_dir},
            {"audit_log", cfg.client.audit_log_path},
            {"single_user_message", cfg.client.single_user_message},
            {"template_path", cfg.template_path},
            {"jobs", cfg.jobs}};
}

class InputError : public std::runtime_error {
  public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};
class EnvError : public std::runtime_error {
  public:
    explicit EnvError(const std::string& what) : std::runtime_error(what) {}
};

// Tree argument: inline notation, '@path', or '-' for stdin.
inline CptNode read_tree_arg(const std::string& arg, std::istream& in) {
    std::string text;
    if (arg == "-") {
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    } else if (!arg.empty() && arg[0] == '@') {
        std::ifstream file(arg.substr(1));
        if (!file) throw EnvError("cannot open tree file '" + arg.substr(1) + "'");
        std::ostringstream buf;
        buf << file.rdbuf();
        text = buf.str();
    } else {
        text = arg;
    }
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return parse(text);
}

struct RendererBundle {
    std::unique_ptr<CompletionClient> client;
    std::unique_ptr<Renderer> renderer;
};

inline RendererBundle make_renderer(const std::string& kind, const CliConfig& cfg,
                                    const TemplateSet& templates) {
    RendererBundle b;
    if (kind == "rule") {
        b.renderer = std::make_unique<RuleRenderer>();
        return b;
    }
    ClientConfig client_cfg = cfg.client;
    Transport transport;
    if (kind == "mock") {
        client_cfg.mock = true;
    } else if (kind == "llm") {
        if (client_cfg.base_url.empty())
            throw EnvError("llm renderer needs a base URL (--base-url, config, or CPTS_BASE_URL)");
        transport = http_transport();
    } else {
        throw InputError("unknown renderer '" + kind + "'");
    }
    b.client = std::make_unique<CompletionClient>(client_cfg, cfg.model, transport);
    b.renderer = std::make_unique<LlmRenderer>(*b.client, templates);
    return b;
}

inline TemplateSet load_templates(const CliConfig& cfg) {
    if (cfg.template_path.empty()) return TemplateSet::defaults();
    std::ifstream in(cfg.template_path);
    if (!in) throw EnvError("cannot open template file '" + cfg.template_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return TemplateSet::parse(buf.str());
}

inline nlohmann::json suite_entry_json(const SuiteEntry& e) {
    return {{"id", e.id},
            {"category", category_name(e.category)},
            {"cpt", serialize(e.tree, NotationStyle::Ascii)},
            {"stats", e.stats}};
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr, std::istream& in = std::cin) {
    CliConfig cfg;
    if (const char* env = std::getenv("CPTS_BASE_URL"); env && *env) cfg.client.base_url = env;

    // --config is resolved before flag parsing so flags win.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            std::ifstream file(argv[i + 1]);
            if (!file) {
                err << "error: cannot open config file '" << argv[i + 1] << "'\n";
                return 2;
            }
            try {
                nlohmann::json j;
                file >> j;
                apply_config_json(j, cfg);
            } catch (const nlohmann::json::exception& e) {
                err << "error: bad config file: " << e.what() << '\n';
                return 1;
            }
        }
    }

    CLI::App app{"Conditional Process Tree generation and Business Process Text Sketch "
                 "conversion"};
    app.require_subcommand(0, 1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags override it)");
    bool show_config = false;
    app.add_flag("--show-config", show_config, "print the resolved configuration (secrets "
                                               "redacted) and exit");

    auto add_gen_flags = [&cfg](CLI::App* cmd) {
        cmd->add_option("--depth", cfg.gen.depth, "maximum tree depth (single node = depth 1)");
        cmd->add_option("--seed", cfg.gen.seed, "generator seed");
        cmd->add_option("--p-zero", cfg.gen.p_zero, "probability of 0 children");
        cmd->add_option("--p-two", cfg.gen.p_two, "probability of 2 children");
        cmd->add_option("--num-low", cfg.gen.num_low, "lower bound for other child counts");
        cmd->add_option("--num-up", cfg.gen.num_up, "upper bound for other child counts");
    };
    auto add_client_flags = [&cfg](CLI::App* cmd) {
        cmd->add_option("--base-url", cfg.client.base_url, "chat-completion endpoint base URL");
        cmd->add_option("--model", cfg.model.model_id, "model identifier");
        cmd->add_option("--temperature", cfg.model.temperature, "sampling temperature");
        cmd->add_option("--rpm", cfg.model.requests_per_minute, "request-per-minute cap");
        cmd->add_option("--cache-dir", cfg.client.cache_dir, "completion cache directory");
        cmd->add_option("--audit-log", cfg.client.audit_log_path, "JSONL audit log path");
        cmd->add_flag("--single-user-message", cfg.client.single_user_message,
                      "send instruction and input as one user message");
        cmd->add_option("--template", cfg.template_path, "prompt template file");
    };

    // gen
    auto* gen_cmd = app.add_subcommand("gen", "generate serialized CPTs, one per line");
    std::size_t gen_n = 1;
    std::string gen_style = "ascii";
    gen_cmd->add_option("--n", gen_n, "number of trees");
    gen_cmd->add_option("--style", gen_style, "notation style: ascii or unicode")
        ->check(CLI::IsMember({"ascii", "unicode"}));
    add_gen_flags(gen_cmd);

    // convert
    auto* convert_cmd = app.add_subcommand("convert", "convert a CPT to a BPTS");
    std::string convert_tree;
    std::string convert_renderer = "rule";
    convert_cmd->add_option("tree", convert_tree, "CPT notation, @file, or - for stdin")
        ->required();
    convert_cmd->add_option("--renderer", convert_renderer, "renderer: rule, llm, or mock")
        ->check(CLI::IsMember({"rule", "llm", "mock"}));
    bool convert_provenance = false;
    convert_cmd->add_flag("--provenance", convert_provenance,
                          "print the full sketch provenance as JSON");
    add_client_flags(convert_cmd);

    // dataset
    auto* dataset_cmd = app.add_subcommand("dataset", "bulk CPT-BPTS pair production (JSONL)");
    std::size_t dataset_n = 100;
    std::string dataset_renderer = "rule";
    std::string dataset_out = "dataset.jsonl";
    bool dataset_resume = false;
    dataset_cmd->add_option("--n", dataset_n, "number of records");
    dataset_cmd->add_option("--renderer", dataset_renderer, "renderer: rule, llm, or mock")
        ->check(CLI::IsMember({"rule", "llm", "mock"}));
    dataset_cmd->add_option("--out", dataset_out, "output JSONL path");
    dataset_cmd->add_flag("--resume", dataset_resume, "skip records already in the output file");
    dataset_cmd->add_option("--jobs", cfg.jobs, "worker pool size (0 = logical cores)");
    add_gen_flags(dataset_cmd);
    add_client_flags(dataset_cmd);

    // suite
    auto* suite_cmd = app.add_subcommand("suite", "build the categorized evaluation suite");
    SuiteSpec spec;
    std::uint64_t suite_seed = 0;
    std::string suite_out;
    std::string suite_score_sheet;
    bool suite_print_stats = false;
    suite_cmd->add_option("--seed", suite_seed, "suite sampling seed");
    suite_cmd->add_option("--out", suite_out, "export suite as JSONL (default: stdout)");
    suite_cmd->add_option("--depth2", spec.depth2, "depth-2 quota");
    suite_cmd->add_option("--depth3", spec.depth3, "depth-3 quota");
    suite_cmd->add_option("--depth4", spec.depth4, "depth-4 quota");
    suite_cmd->add_option("--depth5", spec.depth5, "depth-5 quota");
    suite_cmd->add_option("--multilayer-loop", spec.multilayer_loop,
                          "multilayer-loop quota (loop nesting >= 2)");
    suite_cmd->add_option("--multilayer-selection", spec.multilayer_selection,
                          "multilayer-selection quota (selection nesting >= 2)");
    suite_cmd->add_option("--many-nodes", spec.many_nodes, "many-nodes quota");
    suite_cmd->add_option("--node-threshold", spec.node_threshold,
                          "node count threshold for the many-nodes category");
    suite_cmd->add_flag("--stats", suite_print_stats, "print aggregate suite statistics");
    suite_cmd->add_option("--score-sheet", suite_score_sheet,
                          "emit a blank human-evaluation score sheet (CSV) to this path");

    // baseline
    auto* baseline_cmd =
        app.add_subcommand("baseline", "emit the traditional six-section prompt for a tree");
    std::string baseline_tree;
    int baseline_few_shot = 2;
    baseline_cmd->add_option("tree", baseline_tree, "CPT notation, @file, or - for stdin")
        ->required();
    baseline_cmd->add_option("--few-shot", baseline_few_shot, "number of few-shot examples");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "tree, corpus, or score-sheet statistics");
    std::string stats_tree;
    std::string stats_corpus;
    std::string stats_scores;
    stats_cmd->add_option("tree", stats_tree, "CPT notation, @file, or - for stdin");
    stats_cmd->add_option("--corpus", stats_corpus, "dataset JSONL to summarize");
    stats_cmd->add_option("--scores", stats_scores, "score sheet CSV to aggregate");

    // trace
    auto* trace_cmd = app.add_subcommand("trace", "list bounded execution traces");
    std::string trace_tree;
    int trace_bound = 1;
    trace_cmd->add_option("tree", trace_tree, "CPT notation, @file, or - for stdin")->required();
    trace_cmd->add_option("--bound", trace_bound, "maximum loop iterations (0..3)");

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "report well-formedness violations");
    std::string validate_tree;
    validate_cmd->add_option("tree", validate_tree, "CPT notation, @file, or - for stdin")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            // --help on a subcommand and similar
            out << app.help("", CLI::AppFormatMode::All);
            return 0;
        }
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (show_config) {
            out << config_to_json(cfg).dump(2) << '\n';
            return 0;
        }
        if (app.get_subcommands().empty()) {
            out << app.help("", CLI::AppFormatMode::All);
            return 1;
        }
        if (gen_cmd->parsed()) {
            NotationStyle style =
                gen_style == "unicode" ? NotationStyle::Unicode : NotationStyle::Ascii;
            for (const CptNode& t : generate_batch(cfg.gen, gen_n))
                out << serialize(t, style) << '\n';
            return 0;
        }
        if (convert_cmd->parsed()) {
            CptNode tree = read_tree_arg(convert_tree, in);
            TemplateSet templates = load_templates(cfg);
            RendererBundle b = make_renderer(convert_renderer, cfg, templates);
            Sketch sketch = generate_bpts(tree, *b.renderer);
            if (convert_provenance) {
                nlohmann::json prompts = nlohmann::json::array();
                for (const PromptRecord& p : sketch.prompts)
                    prompts.push_back({{"instruction", p.instruction},
                                       {"input", p.input_block},
                                       {"operator", operator_name(p.op)},
                                       {"response", p.response}});
                out << nlohmann::json{{"text", sketch.text},
                                      {"renderer_id", sketch.renderer_id},
                                      {"template_checksum", sketch.template_checksum},
                                      {"node_sketches", sketch.node_sketches},
                                      {"prompts", prompts}}
                           .dump(2)
                    << '\n';
            } else {
                out << sketch.text << '\n';
            }
            return 0;
        }
        if (dataset_cmd->parsed()) {
            TemplateSet templates = load_templates(cfg);
            RendererBundle b = make_renderer(dataset_renderer, cfg, templates);
            ProduceOptions opts;
            opts.resume = dataset_resume;
            opts.log = &err;
            ProduceSummary s = produce_dataset(cfg.gen, dataset_n, *b.renderer, dataset_out, opts);
            out << "produced " << s.produced << " record(s), " << s.failures << " failure(s), "
                << s.skipped_existing << " already present\n";
            return 0;
        }
        if (suite_cmd->parsed()) {
            std::vector<SuiteEntry> suite = build_suite(spec, cfg.gen, suite_seed);
            if (!suite_out.empty()) {
                std::ofstream f(suite_out);
                if (!f) throw EnvError("cannot open '" + suite_out + "'");
                for (const SuiteEntry& e : suite) f << suite_entry_json(e).dump() << '\n';
            } else if (!suite_print_stats && suite_score_sheet.empty()) {
                for (const SuiteEntry& e : suite) out << suite_entry_json(e).dump() << '\n';
            }
            if (!suite_score_sheet.empty()) {
                std::ofstream f(suite_score_sheet);
                if (!f) throw EnvError("cannot open '" + suite_score_sheet + "'");
                std::vector<std::string> ids;
                for (const SuiteEntry& e : suite) ids.push_back(e.id);
                emit_score_sheet(f, ids);
            }
            if (suite_print_stats) {
                SuiteStats s = suite_stats(suite);
                out << nlohmann::json{{"max_activities", s.max_activities},
                                      {"min_activities", s.min_activities},
                                      {"max_nodes", s.max_nodes},
                                      {"min_nodes", s.min_nodes},
                                      {"max_operators", s.max_operators},
                                      {"min_operators", s.min_operators},
                                      {"multilayer_selection_count", s.multilayer_selection_count},
                                      {"multilayer_loop_count", s.multilayer_loop_count}}
                           .dump(2)
                    << '\n';
            }
            return 0;
        }
        if (baseline_cmd->parsed()) {
            CptNode tree = read_tree_arg(baseline_tree, in);
            BaselineTemplate tmpl;
            tmpl.few_shot_count = baseline_few_shot;
            out << traditional_prompt(tree, tmpl) << '\n';
            return 0;
        }
        if (stats_cmd->parsed()) {
            if (!stats_scores.empty()) {
                std::ifstream f(stats_scores);
                if (!f) throw EnvError("cannot open '" + stats_scores + "'");
                double acc = aggregate_scores(load_score_sheet(f));
                out << "accuracy " << acc << '\n';
                return 0;
            }
            if (!stats_corpus.empty()) {
                DatasetReport r = dataset_report(stats_corpus);
                out << nlohmann::json{{"record_count", r.record_count},
                                      {"failure_count", r.failure_count},
                                      {"max_nodes", r.max_nodes},
                                      {"min_nodes", r.min_nodes},
                                      {"max_activities", r.max_activities},
                                      {"min_activities", r.min_activities},
                                      {"max_operators", r.max_operators},
                                      {"min_operators", r.min_operators},
                                      {"max_depth", r.max_depth}}
                           .dump(2)
                    << '\n';
                return 0;
            }
            if (stats_tree.empty())
                throw InputError("stats needs a tree argument, --corpus, or --scores");
            TreeStats s = stats(read_tree_arg(stats_tree, in));
            out << nlohmann::json(s).dump(2) << '\n';
            return 0;
        }
        if (trace_cmd->parsed()) {
            if (trace_bound < 0 || trace_bound > 3)
                throw InputError("--bound must be between 0 and 3");
            CptNode tree = read_tree_arg(trace_tree, in);
            // std::set orders traces lexicographically: diff-stable output.
            for (const Trace& t : enumerate_traces(tree, trace_bound)) {
                for (std::size_t i = 0; i < t.size(); ++i) {
                    if (i) out << ',';
                    out << t[i];
                }
                out << '\n';
            }
            return 0;
        }
        if (validate_cmd->parsed()) {
            CptNode tree = read_tree_arg(validate_tree, in);
            std::vector<Violation> violations = validate(tree);
            for (const Violation& v : violations)
                out << v.rule << " at '" << v.path << "': " << v.message << '\n';
            if (violations.empty()) {
                out << "ok\n";
                return 0;
            }
            return 1;
        }
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return 1;
    } catch (const InvalidTree& e) {
        err << "invalid tree: " << e.what() << '\n';
        return 1;
    } catch (const InvalidParams& e) {
        err << "invalid parameters: " << e.what() << '\n';
        return 1;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const BoundExceeded& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const AuthError& e) {
        err << "api error: " << e.what() << '\n';
        return 2;
    } catch (const RateLimited& e) {
        err << "api error: " << e.what() << '\n';
        return 2;
    } catch (const CompletionTimeout& e) {
        err << "api error: " << e.what() << '\n';
        return 2;
    } catch (const MalformedResponse& e) {
        err << "api error: " << e.what() << '\n';
        return 2;
    } catch (const EnvError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const SinkError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace cpts::cli
