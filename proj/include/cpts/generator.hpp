#pragma once

// Random CPT generation pipeline: shape tree (breadth-first child-count
// draws) -> rough CPT (element assignment) -> rationalized CPT
// (nested-sequence/parallel splicing, loop condition repair).

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpts/core.hpp"
#include "cpts/rng.hpp"

namespace cpts {

class InvalidParams : public std::runtime_error {
  public:
    explicit InvalidParams(const std::string& what) : std::runtime_error(what) {}
};

class ShapeError : public std::runtime_error {
  public:
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

struct GenParams {
    int depth = 5;
    double p_zero = 0.3;
    double p_two = 0.4;
    int num_low = 3;
    int num_up = 5;
    std::uint64_t seed = 0;

    void check() const {
        if (depth < 1) throw InvalidParams("depth must be >= 1");
        if (p_zero < 0.0 || p_zero > 1.0) throw InvalidParams("p_zero must be in [0,1]");
        if (p_two < 0.0 || p_two > 1.0) throw InvalidParams("p_two must be in [0,1]");
        if (p_zero + p_two > 1.0) throw InvalidParams("p_zero + p_two must be <= 1");
        if (num_low < 3) throw InvalidParams("num_low must be >= 3");
        if (num_up < num_low) throw InvalidParams("num_up must be >= num_low");
    }
};

struct ShapeNode {
    std::vector<ShapeNode> children;
};

inline ShapeNode random_tree(const GenParams& params, Rng& rng) {
    params.check();
    struct Slot {
        int depth;
        std::vector<std::size_t> kids;
    };
    std::vector<Slot> arena;
    arena.push_back({1, {}});
    std::deque<std::size_t> queue{0};
    while (!queue.empty()) {
        std::size_t idx = queue.front();
        queue.pop_front();
        if (arena[idx].depth >= params.depth) continue;  // depth limit: leaf
        int count = 0;
        double u = rng.next_double();
        if (u < params.p_zero)
            count = 0;
        else if (u < params.p_zero + params.p_two)
            count = 2;
        else
            count = rng.uniform_int(params.num_low, params.num_up);
        for (int i = 0; i < count; ++i) {
            arena.push_back({arena[idx].depth + 1, {}});
            arena[idx].kids.push_back(arena.size() - 1);
            queue.push_back(arena.size() - 1);
        }
    }
    // Arena indices to owned nodes.
    auto build = [&](auto&& self, std::size_t idx) -> ShapeNode {
        ShapeNode n;
        for (std::size_t k : arena[idx].kids) n.children.push_back(self(self, k));
        return n;
    };
    return build(build, 0);
}

inline ShapeNode random_tree(const GenParams& params) {
    Rng rng(params.seed);
    return random_tree(params, rng);
}

namespace detail {

inline CptNode assign_rec(const ShapeNode& shape, Rng& rng, int& next_activity,
                          int& next_condition) {
    if (shape.children.empty()) {
        return {Element::activity("a_" + std::to_string(next_activity++)), {}};
    }
    if (shape.children.size() == 1)
        throw ShapeError("shape has a 1-child node; no operator is defined for it");

    Element elem;
    if (shape.children.size() == 2) {
        switch (rng.uniform_int(0, 3)) {
            case 0: elem = Element::op_node(OperatorKind::Sequence); break;
            case 1: elem = Element::op_node(OperatorKind::Exclusive); break;
            case 2: elem = Element::op_node(OperatorKind::Parallel); break;
            default: elem = Element::op_node(OperatorKind::Loop); break;
        }
    } else {
        elem = rng.uniform_int(0, 1) == 0 ? Element::op_node(OperatorKind::Sequence)
                                          : Element::op_node(OperatorKind::Parallel);
    }
    if (elem.type == Element::Type::Operator && elem.op == OperatorKind::Exclusive)
        elem.label = "c_" + std::to_string(next_condition++);

    CptNode node{std::move(elem), {}};
    node.children.reserve(shape.children.size());
    for (const ShapeNode& ch : shape.children)
        node.children.push_back(assign_rec(ch, rng, next_activity, next_condition));
    return node;
}

inline int max_condition_index(const CptNode& node) {
    int best = 0;
    const std::string* label = nullptr;
    if (node.element.type == Element::Type::Condition ||
        (node.is_op(OperatorKind::Exclusive)))
        label = &node.element.label;
    if (label && is_condition_label(*label)) best = std::stoi(label->substr(2));
    for (const CptNode& ch : node.children) best = std::max(best, max_condition_index(ch));
    return best;
}

}  // namespace detail

inline CptNode assign_elements(const ShapeNode& shape, Rng& rng) {
    int next_activity = 1;
    int next_condition = 1;
    return detail::assign_rec(shape, rng, next_activity, next_condition);
}

enum class NestingRepair { Splice, Delete };

// Repairs sequence-under-sequence and parallel-under-parallel nesting,
// bottom-up. Splice hoists the child's children in place (trace-set
// preserving); Delete drops the offending subtree, collapsing the parent
// if fewer than 2 children remain.
inline CptNode splice_nested(CptNode node, NestingRepair mode = NestingRepair::Splice) {
    for (CptNode& ch : node.children) ch = splice_nested(std::move(ch), mode);
    if (node.is_op(OperatorKind::Sequence) || node.is_op(OperatorKind::Parallel)) {
        std::vector<CptNode> flat;
        flat.reserve(node.children.size());
        for (CptNode& ch : node.children) {
            if (ch.is_op(node.element.op)) {
                if (mode == NestingRepair::Splice)
                    for (CptNode& g : ch.children) flat.push_back(std::move(g));
                // Delete: drop the subtree entirely.
            } else {
                flat.push_back(std::move(ch));
            }
        }
        node.children = std::move(flat);
        if (mode == NestingRepair::Delete && node.children.size() < 2) {
            if (node.children.size() == 1) return std::move(node.children[0]);
            return {Element::silent(), {}};
        }
    }
    return node;
}

namespace detail {

inline void fix_loops_rec(CptNode& node, int& next_condition) {
    if (node.is_op(OperatorKind::Loop) && !node.children.empty() &&
        node.children[0].element.type != Element::Type::Condition) {
        node.children[0] = {Element::condition("c_" + std::to_string(next_condition++)), {}};
    }
    for (CptNode& ch : node.children) fix_loops_rec(ch, next_condition);
}

}  // namespace detail

inline CptNode rationalize(CptNode rough, NestingRepair mode = NestingRepair::Splice) {
    CptNode out = splice_nested(std::move(rough), mode);
    int next_condition = detail::max_condition_index(out) + 1;
    detail::fix_loops_rec(out, next_condition);
    return out;
}

inline CptNode generate_cpt(const GenParams& params) {
    params.check();
    Rng rng(params.seed);
    ShapeNode shape = random_tree(params, rng);
    CptNode rough = assign_elements(shape, rng);
    return rationalize(std::move(rough));
}

inline std::vector<CptNode> generate_batch(const GenParams& params, std::size_t n) {
    params.check();
    if (n < 1) throw InvalidParams("batch size must be >= 1");
    std::vector<CptNode> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        GenParams sub = params;
        sub.seed = derive_subseed(params.seed, i);
        out.push_back(generate_cpt(sub));
    }
    return out;
}

}  // namespace cpts
