#pragma once

// Conditional Process Tree data model: elements, nodes, structural
// statistics and well-formedness validation.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpts {

enum class OperatorKind { Sequence, Exclusive, Parallel, Loop };

inline const char* operator_name(OperatorKind k) {
    switch (k) {
        case OperatorKind::Sequence: return "sequence";
        case OperatorKind::Exclusive: return "exclusive";
        case OperatorKind::Parallel: return "parallel";
        case OperatorKind::Loop: return "loop";
    }
    return "?";
}

struct Element {
    enum class Type { Activity, Condition, Operator, Silent };

    Type type = Type::Silent;
    // Activity: "a_<k>"; Condition: "c_<k>"; Operator with kind Exclusive:
    // the branch condition "c_<k>"; empty otherwise.
    std::string label;
    OperatorKind op = OperatorKind::Sequence;  // meaningful iff type == Operator

    static Element activity(std::string label) {
        return {Type::Activity, std::move(label), OperatorKind::Sequence};
    }
    static Element condition(std::string label) {
        return {Type::Condition, std::move(label), OperatorKind::Sequence};
    }
    static Element op_node(OperatorKind kind, std::string cond = {}) {
        return {Type::Operator, std::move(cond), kind};
    }
    static Element silent() { return {Type::Silent, {}, OperatorKind::Sequence}; }

    bool operator==(const Element& other) const {
        if (type != other.type || label != other.label) return false;
        if (type == Type::Operator && op != other.op) return false;
        return true;
    }
};

struct CptNode {
    Element element;
    std::vector<CptNode> children;

    bool is_leaf() const { return children.empty(); }
    bool is_operator() const { return element.type == Element::Type::Operator; }
    bool is_op(OperatorKind k) const { return is_operator() && element.op == k; }

    bool operator==(const CptNode& other) const {
        return element == other.element && children == other.children;
    }
};

// Convenience builders used throughout tests and the generator.
inline CptNode activity(int k) { return {Element::activity("a_" + std::to_string(k)), {}}; }
inline CptNode condition(int k) { return {Element::condition("c_" + std::to_string(k)), {}}; }
inline CptNode seq(std::vector<CptNode> kids) {
    return {Element::op_node(OperatorKind::Sequence), std::move(kids)};
}
inline CptNode par(std::vector<CptNode> kids) {
    return {Element::op_node(OperatorKind::Parallel), std::move(kids)};
}
inline CptNode exclusive(std::string cond, CptNode left, CptNode right) {
    return {Element::op_node(OperatorKind::Exclusive, std::move(cond)),
            {std::move(left), std::move(right)}};
}
inline CptNode loop(CptNode cond_leaf, CptNode body) {
    return {Element::op_node(OperatorKind::Loop), {std::move(cond_leaf), std::move(body)}};
}

// Label pattern checks: a_<positive integer> / c_<positive integer>.
namespace detail {
inline bool is_numbered_label(const std::string& s, char prefix) {
    if (s.size() < 3 || s[0] != prefix || s[1] != '_') return false;
    if (s[2] == '0') return false;  // indices start at 1, no leading zeros
    return std::all_of(s.begin() + 2, s.end(), [](char c) { return c >= '0' && c <= '9'; });
}
}  // namespace detail

inline bool is_activity_label(const std::string& s) { return detail::is_numbered_label(s, 'a'); }
inline bool is_condition_label(const std::string& s) { return detail::is_numbered_label(s, 'c'); }

struct Violation {
    std::string path;  // child-index path from the root, e.g. "0.1"; "" for root
    std::string rule;
    std::string message;
};

class InvalidTree : public std::runtime_error {
  public:
    explicit InvalidTree(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string child_path(const std::string& base, std::size_t i) {
    return base.empty() ? std::to_string(i) : base + "." + std::to_string(i);
}

inline void validate_rec(const CptNode& node, const std::string& path,
                         std::vector<Violation>& out) {
    const Element& e = node.element;
    switch (e.type) {
        case Element::Type::Activity:
            if (!is_activity_label(e.label))
                out.push_back({path, "bad-activity-label", "activity label '" + e.label +
                                                               "' does not match a_<n>"});
            if (!node.children.empty())
                out.push_back({path, "leaf-has-children", "activity leaf has children"});
            break;
        case Element::Type::Condition:
            if (!is_condition_label(e.label))
                out.push_back({path, "bad-condition-label", "condition label '" + e.label +
                                                                "' does not match c_<n>"});
            if (!node.children.empty())
                out.push_back({path, "leaf-has-children", "condition leaf has children"});
            break;
        case Element::Type::Silent:
            if (!e.label.empty())
                out.push_back({path, "silent-has-label", "silent activity carries a label"});
            if (!node.children.empty())
                out.push_back({path, "leaf-has-children", "silent leaf has children"});
            break;
        case Element::Type::Operator:
            switch (e.op) {
                case OperatorKind::Sequence:
                case OperatorKind::Parallel:
                    if (node.children.size() < 2)
                        out.push_back({path,
                                       e.op == OperatorKind::Sequence ? "seq-arity" : "par-arity",
                                       std::string(operator_name(e.op)) +
                                           " node has fewer than 2 children"});
                    for (std::size_t i = 0; i < node.children.size(); ++i) {
                        const CptNode& ch = node.children[i];
                        if (ch.is_op(e.op))
                            out.push_back({child_path(path, i),
                                           e.op == OperatorKind::Sequence ? "seq-under-seq"
                                                                          : "par-under-par",
                                           std::string(operator_name(e.op)) + " node nested under " +
                                               operator_name(e.op) + " parent"});
                    }
                    break;
                case OperatorKind::Exclusive:
                    if (node.children.size() != 2)
                        out.push_back({path, "xor-arity", "exclusive node must have exactly 2 "
                                                          "children"});
                    if (!is_condition_label(e.label))
                        out.push_back({path, "xor-missing-condition",
                                       "exclusive node condition '" + e.label +
                                           "' does not match c_<n>"});
                    break;
                case OperatorKind::Loop:
                    if (node.children.size() != 2)
                        out.push_back({path, "loop-arity", "loop node must have exactly 2 children"});
                    if (!node.children.empty() &&
                        node.children[0].element.type != Element::Type::Condition)
                        out.push_back({path, "loop-first-child-not-condition",
                                       "loop first child is not a condition leaf"});
                    break;
            }
            break;
    }
    for (std::size_t i = 0; i < node.children.size(); ++i)
        validate_rec(node.children[i], child_path(path, i), out);
}

}  // namespace detail

inline std::vector<Violation> validate(const CptNode& node) {
    std::vector<Violation> out;
    detail::validate_rec(node, "", out);
    return out;
}

struct TreeStats {
    int depth = 0;  // node levels; single node = 1
    int node_count = 0;
    int activity_count = 0;
    int operator_count = 0;
    int max_selection_nesting = 0;  // exclusive nodes on the deepest such path
    int max_loop_nesting = 0;
};

namespace detail {

inline void stats_rec(const CptNode& node, int level, int sel, int lp, TreeStats& s) {
    s.node_count += 1;
    s.depth = std::max(s.depth, level);
    switch (node.element.type) {
        case Element::Type::Activity: s.activity_count += 1; break;
        case Element::Type::Operator:
            s.operator_count += 1;
            if (node.element.op == OperatorKind::Exclusive) ++sel;
            if (node.element.op == OperatorKind::Loop) ++lp;
            break;
        default: break;
    }
    s.max_selection_nesting = std::max(s.max_selection_nesting, sel);
    s.max_loop_nesting = std::max(s.max_loop_nesting, lp);
    for (const CptNode& ch : node.children) stats_rec(ch, level + 1, sel, lp, s);
}

}  // namespace detail

inline TreeStats stats(const CptNode& node) {
    if (auto v = validate(node); !v.empty())
        throw InvalidTree("stats: tree has " + std::to_string(v.size()) +
                          " violation(s), first: " + v.front().rule + " at '" + v.front().path +
                          "'");
    TreeStats s;
    detail::stats_rec(node, 1, 0, 0, s);
    return s;
}

}  // namespace cpts
