#pragma once

// BPTS generation: post-order divide-and-conquer over the tree. Leaves
// render directly; each operator node merges its children's sub-sketches
// through a Renderer (deterministic rule templates, or an LLM completion
// behind the same interface). A back-parser inverts the rule renderer's
// output as a round-trip oracle.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cpts/core.hpp"
#include "cpts/model_params.hpp"

namespace cpts {

// The fixed rewriting instruction; byte-identical across all prompts.
inline constexpr std::string_view kInstruction =
    "Cover the input into fluent natural language without changing its meaning";

class NotALeaf : public std::runtime_error {
  public:
    explicit NotALeaf(const std::string& what) : std::runtime_error(what) {}
};
class ArityMismatch : public std::runtime_error {
  public:
    explicit ArityMismatch(const std::string& what) : std::runtime_error(what) {}
};
class MissingCondition : public std::runtime_error {
  public:
    explicit MissingCondition(const std::string& what) : std::runtime_error(what) {}
};
class RendererFailure : public std::runtime_error {
  public:
    RendererFailure(std::string path, const std::string& what)
        : std::runtime_error("renderer failed at node '" + path + "': " + what),
          path_(std::move(path)) {}
    const std::string& path() const { return path_; }

  private:
    std::string path_;
};
class BackParseError : public std::runtime_error {
  public:
    BackParseError(std::size_t position, const std::string& what)
        : std::runtime_error(what + " (at byte " + std::to_string(position) + ")"),
          position_(position) {}
    std::size_t position() const { return position_; }

  private:
    std::size_t position_;
};

struct PromptRecord {
    std::string instruction{kInstruction};
    std::string input_block;
    OperatorKind op = OperatorKind::Sequence;
    std::string response;
    ModelParams model_params;
};

struct Sketch {
    std::string text;
    std::map<std::string, std::string> node_sketches;  // tree path -> sub-sketch
    std::string renderer_id;                           // "rule" | "llm" | "mock" | custom
    std::vector<PromptRecord> prompts;
    std::string template_checksum;
};

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::string fnv1a64_hex(std::string_view data) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 0xF];
    return out;
}

[[nodiscard]] inline std::string render_leaf(const CptNode& node) {
    if (!node.is_leaf()) throw NotALeaf("render_leaf called on an operator node");
    switch (node.element.type) {
        case Element::Type::Activity: return "execute activity " + node.element.label;
        case Element::Type::Condition: return node.element.label;
        case Element::Type::Silent: return "";
        default: throw NotALeaf("operator element without children");
    }
}

namespace detail {

inline void check_merge_arity(OperatorKind op, std::size_t nsubs,
                              const std::optional<std::string>& cond) {
    switch (op) {
        case OperatorKind::Sequence:
        case OperatorKind::Parallel:
            if (nsubs < 2)
                throw ArityMismatch(std::string(operator_name(op)) +
                                    " merge needs at least 2 sub-sketches, got " +
                                    std::to_string(nsubs));
            break;
        case OperatorKind::Exclusive:
            if (nsubs != 2)
                throw ArityMismatch("exclusive merge needs exactly 2 sub-sketches, got " +
                                    std::to_string(nsubs));
            if (!cond) throw MissingCondition("exclusive merge needs a condition label");
            break;
        case OperatorKind::Loop:
            if (nsubs != 1)
                throw ArityMismatch("loop merge needs exactly 1 sub-sketch, got " +
                                    std::to_string(nsubs));
            if (!cond) throw MissingCondition("loop merge needs a condition label");
            break;
    }
}

}  // namespace detail

// Prompt input templates, loadable from a plain-text file with one
// section per operator. Slots: {cond}, {sub1}, {sub2} and {subs} (which
// expands to a numbered list "1. <s1> 2. <s2> ...").
class TemplateSet {
  public:
    static constexpr std::string_view kDefaultText =
        "[instruction]\n"
        "Cover the input into fluent natural language without changing its meaning\n"
        "[sequence]\n"
        "do in order: {subs}\n"
        "[parallel]\n"
        "do all of the following at the same time: {subs}\n"
        "[exclusive]\n"
        "if {cond} then: {sub1} else: {sub2}\n"
        "[loop]\n"
        "while {cond} holds, repeatedly: {sub1}; stop when {cond} no longer holds\n";

    static TemplateSet parse(std::string_view text) {
        TemplateSet t;
        t.checksum_ = fnv1a64_hex(text);
        std::string current;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t eol = text.find('\n', pos);
            if (eol == std::string_view::npos) eol = text.size();
            std::string_view line = text.substr(pos, eol - pos);
            pos = eol + 1;
            if (line.empty() || line[0] == '#') continue;
            if (line.front() == '[' && line.back() == ']') {
                current = std::string(line.substr(1, line.size() - 2));
                continue;
            }
            std::string& slot = t.section(current);
            if (!slot.empty()) slot += '\n';
            slot += std::string(line);
            if (pos > text.size()) break;
        }
        for (const char* name : {"instruction", "sequence", "parallel", "exclusive", "loop"})
            if (t.section(name).empty())
                throw std::runtime_error(std::string("template file missing section [") + name +
                                         "]");
        return t;
    }

    static const TemplateSet& defaults() {
        static const TemplateSet t = parse(kDefaultText);
        return t;
    }

    const std::string& instruction() const { return instruction_; }
    const std::string& checksum() const { return checksum_; }

    std::string expand(OperatorKind op, const std::vector<std::string>& subs,
                       const std::optional<std::string>& cond) const {
        detail::check_merge_arity(op, subs.size(), cond);
        std::string body;
        switch (op) {
            case OperatorKind::Sequence: body = sequence_; break;
            case OperatorKind::Parallel: body = parallel_; break;
            case OperatorKind::Exclusive: body = exclusive_; break;
            case OperatorKind::Loop: body = loop_; break;
        }
        std::string numbered;
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (i) numbered += ' ';
            numbered += std::to_string(i + 1) + ". " + subs[i];
        }
        replace_all(body, "{subs}", numbered);
        if (cond) replace_all(body, "{cond}", *cond);
        for (std::size_t i = 0; i < subs.size(); ++i)
            replace_all(body, "{sub" + std::to_string(i + 1) + "}", subs[i]);
        return body;
    }

  private:
    std::string instruction_, sequence_, parallel_, exclusive_, loop_, other_, checksum_;

    std::string& section(const std::string& name) {
        if (name == "instruction") return instruction_;
        if (name == "sequence") return sequence_;
        if (name == "parallel") return parallel_;
        if (name == "exclusive") return exclusive_;
        if (name == "loop") return loop_;
        return other_;
    }

    static void replace_all(std::string& s, const std::string& from, const std::string& to) {
        for (std::size_t at = 0; (at = s.find(from, at)) != std::string::npos; at += to.size())
            s.replace(at, from.size(), to);
    }
};

inline PromptRecord construct_prompt(OperatorKind op, const std::vector<std::string>& subs,
                                     const std::optional<std::string>& cond,
                                     const TemplateSet& templates = TemplateSet::defaults()) {
    PromptRecord rec;
    rec.instruction = templates.instruction();
    rec.input_block = templates.expand(op, subs, cond);
    rec.op = op;
    return rec;
}

// Renderer: merges ordered sub-sketches at one operator node.
class Renderer {
  public:
    virtual ~Renderer() = default;
    virtual std::string id() const = 0;
    virtual std::string render(OperatorKind op, const std::vector<std::string>& subs,
                               const std::optional<std::string>& cond) = 0;
    // Prompt records accumulated since the last drain (empty for
    // non-prompting renderers).
    virtual std::vector<PromptRecord> drain_prompts() { return {}; }
    virtual std::string template_checksum() const { return ""; }
};

namespace detail {

// A sub-sketch is atomic when it embeds safely into a surrounding
// template without delimiters; anything else is parenthesized so the
// back-parser can recover the nesting.
inline bool is_atomic_sketch(const std::string& s) {
    return !s.empty() && s.find_first_of(".();,") == std::string::npos;
}

inline std::string wrap(const std::string& s) {
    return is_atomic_sketch(s) ? s : "(" + s + ")";
}

}  // namespace detail

[[nodiscard]] inline std::string rule_render(OperatorKind op, const std::vector<std::string>& subs,
                                             const std::optional<std::string>& cond = {}) {
    detail::check_merge_arity(op, subs.size(), cond);
    std::string out;
    switch (op) {
        case OperatorKind::Sequence:
            for (std::size_t i = 0; i < subs.size(); ++i) {
                out += i == 0 ? "First, " : " Then, ";
                out += detail::wrap(subs[i]);
                out += '.';
            }
            break;
        case OperatorKind::Exclusive:
            out = "If condition " + *cond + " is met, " + detail::wrap(subs[0]) +
                  ". Otherwise, " + detail::wrap(subs[1]) + ".";
            break;
        case OperatorKind::Parallel:
            out = "Simultaneously:";
            for (std::size_t i = 0; i < subs.size(); ++i) {
                if (i) out += " and";
                out += " (" + subs[i] + ")";
            }
            out += '.';
            break;
        case OperatorKind::Loop:
            out = "While condition " + *cond + " is satisfied, repeatedly " +
                  detail::wrap(subs[0]) + "; once " + *cond +
                  " is not met, the loop ends.";
            break;
    }
    return out;
}

class RuleRenderer final : public Renderer {
  public:
    std::string id() const override { return "rule"; }
    std::string render(OperatorKind op, const std::vector<std::string>& subs,
                       const std::optional<std::string>& cond) override {
        return rule_render(op, subs, cond);
    }
    std::string template_checksum() const override {
        // Version stamp of the built-in rule templates.
        return fnv1a64_hex("rule-templates-v1");
    }
};

namespace detail {

struct SketchBuild {
    Renderer* renderer;
    Sketch* out;
};

inline std::string sketch_rec(const CptNode& node, const std::string& path, SketchBuild& b) {
    if (node.is_leaf()) return render_leaf(node);

    std::vector<std::string> subs;
    std::optional<std::string> cond;
    if (node.is_op(OperatorKind::Loop)) {
        // The condition leaf is passed as the label, never rendered as a
        // sub-sketch.
        cond = node.children.at(0).element.label;
        subs.push_back(sketch_rec(node.children.at(1), child_path(path, 1), b));
    } else {
        if (node.is_op(OperatorKind::Exclusive)) cond = node.element.label;
        for (std::size_t i = 0; i < node.children.size(); ++i)
            subs.push_back(sketch_rec(node.children[i], child_path(path, i), b));
    }

    std::string merged;
    try {
        merged = b.renderer->render(node.element.op, subs, cond);
    } catch (const RendererFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw RendererFailure(path, e.what());
    }
    b.out->node_sketches[path] = merged;
    return merged;
}

}  // namespace detail

inline Sketch generate_bpts(const CptNode& cpt, Renderer& renderer) {
    if (auto v = validate(cpt); !v.empty())
        throw InvalidTree("generate_bpts: tree has violations, first: " + v.front().rule);
    Sketch sketch;
    sketch.renderer_id = renderer.id();
    sketch.template_checksum = renderer.template_checksum();
    detail::SketchBuild b{&renderer, &sketch};
    sketch.text = detail::sketch_rec(cpt, "", b);
    sketch.prompts = renderer.drain_prompts();
    return sketch;
}

// ---- Back-parser (oracle over rule-rendered text) ----

namespace detail {

class BackParser {
  public:
    explicit BackParser(std::string_view text, std::size_t base = 0)
        : text_(text), base_(base) {}

    CptNode parse() {
        CptNode t = parse_sketch(text_);
        return t;
    }

  private:
    std::string_view text_;
    std::size_t base_;

    [[noreturn]] void fail(std::size_t at, const std::string& msg) {
        throw BackParseError(base_ + at, msg);
    }

    static bool starts_with(std::string_view s, std::string_view p) {
        return s.substr(0, p.size()) == p;
    }

    // Finds `needle` at paren depth 0, starting from `from`.
    static std::size_t find_top_level(std::string_view s, std::string_view needle,
                                      std::size_t from = 0) {
        int depth = 0;
        for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
            if (s[i] == '(') ++depth;
            else if (s[i] == ')') --depth;
            else if (depth == 0 && s.substr(i, needle.size()) == needle)
                return i;
        }
        return std::string_view::npos;
    }

    CptNode parse_item(std::string_view item, std::size_t at) {
        if (!item.empty() && item.front() == '(' && item.back() == ')') {
            int depth = 0;
            bool outer = true;
            for (std::size_t i = 0; i < item.size(); ++i) {
                if (item[i] == '(') ++depth;
                else if (item[i] == ')') {
                    --depth;
                    if (depth == 0 && i + 1 != item.size()) outer = false;
                }
            }
            if (outer)
                return BackParser(item.substr(1, item.size() - 2), base_ + at + 1).parse();
        }
        return BackParser(item, base_ + at).parse();
    }

    std::string parse_cond_label(std::string_view s, std::size_t at) {
        std::size_t sp = s.find(' ');
        std::string label(s.substr(0, sp == std::string_view::npos ? s.size() : sp));
        if (!is_condition_label(label)) fail(at, "expected condition label, got '" + label + "'");
        return label;
    }

    CptNode parse_sketch(std::string_view s) {
        if (starts_with(s, "First, ")) return parse_sequence(s);
        if (starts_with(s, "If condition ")) return parse_exclusive(s);
        if (starts_with(s, "Simultaneously:")) return parse_parallel(s);
        if (starts_with(s, "While condition ")) return parse_loop(s);
        if (starts_with(s, "execute activity ")) {
            std::string label(s.substr(17));
            if (!is_activity_label(label)) fail(17, "bad activity label '" + label + "'");
            return {Element::activity(std::move(label)), {}};
        }
        if (is_condition_label(std::string(s))) return {Element::condition(std::string(s)), {}};
        fail(0, "unrecognized sketch fragment");
    }

    CptNode parse_sequence(std::string_view s) {
        std::vector<CptNode> kids;
        std::size_t pos = 7;  // after "First, "
        while (true) {
            std::size_t dot = find_top_level(s, ".", pos);
            if (dot == std::string_view::npos) fail(pos, "sequence item missing terminator '.'");
            kids.push_back(parse_item(s.substr(pos, dot - pos), pos));
            pos = dot + 1;
            if (pos == s.size()) break;
            if (!starts_with(s.substr(pos), " Then, "))
                fail(pos, "expected ' Then, ' between sequence items");
            pos += 7;
        }
        if (kids.size() < 2) fail(0, "sequence sketch with fewer than 2 items");
        return {Element::op_node(OperatorKind::Sequence), std::move(kids)};
    }

    CptNode parse_exclusive(std::string_view s) {
        std::size_t pos = 13;  // after "If condition "
        std::size_t met = s.find(" is met, ", pos);
        if (met == std::string_view::npos) fail(pos, "exclusive sketch missing ' is met, '");
        std::string cond = parse_cond_label(s.substr(pos, met - pos), pos);
        std::size_t body = met + 9;
        std::size_t sep = find_top_level(s, ". Otherwise, ", body);
        if (sep == std::string_view::npos) fail(body, "exclusive sketch missing '. Otherwise, '");
        CptNode left = parse_item(s.substr(body, sep - body), body);
        std::size_t rpos = sep + 13;
        if (s.empty() || s.back() != '.') fail(s.size(), "exclusive sketch missing final '.'");
        CptNode right = parse_item(s.substr(rpos, s.size() - 1 - rpos), rpos);
        return {Element::op_node(OperatorKind::Exclusive, std::move(cond)),
                {std::move(left), std::move(right)}};
    }

    CptNode parse_parallel(std::string_view s) {
        std::vector<CptNode> kids;
        std::size_t pos = 15;  // after "Simultaneously:"
        while (true) {
            if (!starts_with(s.substr(pos), " (")) fail(pos, "expected ' (' in parallel sketch");
            pos += 2;
            int depth = 1;
            std::size_t start = pos;
            while (pos < s.size() && depth > 0) {
                if (s[pos] == '(') ++depth;
                else if (s[pos] == ')') --depth;
                ++pos;
            }
            if (depth != 0) fail(start, "unbalanced parentheses in parallel sketch");
            kids.push_back(parse_item(s.substr(start, pos - 1 - start), start));
            if (starts_with(s.substr(pos), " and")) {
                pos += 4;
                continue;
            }
            if (s.substr(pos) == ".") break;
            fail(pos, "expected ' and' or final '.' in parallel sketch");
        }
        if (kids.size() < 2) fail(0, "parallel sketch with fewer than 2 items");
        return {Element::op_node(OperatorKind::Parallel), std::move(kids)};
    }

    CptNode parse_loop(std::string_view s) {
        std::size_t pos = 16;  // after "While condition "
        std::size_t sat = s.find(" is satisfied, repeatedly ", pos);
        if (sat == std::string_view::npos)
            fail(pos, "loop sketch missing ' is satisfied, repeatedly '");
        std::string cond = parse_cond_label(s.substr(pos, sat - pos), pos);
        std::size_t body = sat + 26;
        std::string tail = "; once " + cond + " is not met, the loop ends.";
        std::size_t sep = find_top_level(s, tail, body);
        if (sep == std::string_view::npos || sep + tail.size() != s.size())
            fail(body, "loop sketch missing closing clause");
        CptNode b = parse_item(s.substr(body, sep - body), body);
        CptNode cond_leaf{Element::condition(std::move(cond)), {}};
        return {Element::op_node(OperatorKind::Loop), {std::move(cond_leaf), std::move(b)}};
    }
};

}  // namespace detail

inline CptNode back_parse(std::string_view text) {
    if (text.empty()) throw BackParseError(0, "empty sketch text");
    return detail::BackParser(text).parse();
}

}  // namespace cpts
