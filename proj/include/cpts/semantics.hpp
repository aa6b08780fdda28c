#pragma once

// Bounded execution-trace oracle. Conditions are free oracles (either
// outcome possible at each evaluation), so the language is over activity
// labels only; loops are expanded up to loop_bound iterations.

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpts/core.hpp"

namespace cpts {

using Trace = std::vector<std::string>;
using TraceSet = std::set<Trace>;

class BoundExceeded : public std::runtime_error {
  public:
    explicit BoundExceeded(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr std::size_t kDefaultTraceCap = 100000;

namespace detail {

inline void check_cap(std::size_t size, std::size_t cap) {
    if (size > cap)
        throw BoundExceeded("trace set exceeds cap of " + std::to_string(cap));
}

inline TraceSet concat_sets(const TraceSet& a, const TraceSet& b, std::size_t cap) {
    check_cap(a.size() * b.size(), cap);
    TraceSet out;
    for (const Trace& x : a)
        for (const Trace& y : b) {
            Trace t = x;
            t.insert(t.end(), y.begin(), y.end());
            out.insert(std::move(t));
        }
    return out;
}

inline void interleave_rec(const Trace& x, std::size_t i, const Trace& y, std::size_t j,
                           Trace& acc, TraceSet& out, std::size_t cap) {
    if (i == x.size() && j == y.size()) {
        out.insert(acc);
        check_cap(out.size(), cap);
        return;
    }
    if (i < x.size()) {
        acc.push_back(x[i]);
        interleave_rec(x, i + 1, y, j, acc, out, cap);
        acc.pop_back();
    }
    if (j < y.size()) {
        acc.push_back(y[j]);
        interleave_rec(x, i, y, j + 1, acc, out, cap);
        acc.pop_back();
    }
}

inline TraceSet shuffle_sets(const TraceSet& a, const TraceSet& b, std::size_t cap) {
    TraceSet out;
    for (const Trace& x : a)
        for (const Trace& y : b) {
            Trace acc;
            acc.reserve(x.size() + y.size());
            interleave_rec(x, 0, y, 0, acc, out, cap);
        }
    return out;
}

inline TraceSet traces_rec(const CptNode& node, int loop_bound, std::size_t cap) {
    switch (node.element.type) {
        case Element::Type::Activity: return {{node.element.label}};
        case Element::Type::Condition:
        case Element::Type::Silent: return {Trace{}};
        case Element::Type::Operator: break;
    }
    switch (node.element.op) {
        case OperatorKind::Sequence: {
            TraceSet acc{Trace{}};
            for (const CptNode& ch : node.children)
                acc = concat_sets(acc, traces_rec(ch, loop_bound, cap), cap);
            return acc;
        }
        case OperatorKind::Exclusive: {
            TraceSet out = traces_rec(node.children.at(0), loop_bound, cap);
            TraceSet right = traces_rec(node.children.at(1), loop_bound, cap);
            out.insert(right.begin(), right.end());
            check_cap(out.size(), cap);
            return out;
        }
        case OperatorKind::Parallel: {
            TraceSet acc{Trace{}};
            for (const CptNode& ch : node.children)
                acc = shuffle_sets(acc, traces_rec(ch, loop_bound, cap), cap);
            return acc;
        }
        case OperatorKind::Loop: {
            // First child is the condition (no activity contribution);
            // body may run 0..loop_bound times.
            TraceSet body = traces_rec(node.children.at(1), loop_bound, cap);
            TraceSet out{Trace{}};
            TraceSet power{Trace{}};
            for (int r = 1; r <= loop_bound; ++r) {
                power = concat_sets(power, body, cap);
                out.insert(power.begin(), power.end());
                check_cap(out.size(), cap);
            }
            return out;
        }
    }
    return {};
}

}  // namespace detail

// `checked = false` skips well-formedness validation so rough (not yet
// rationalized) trees can be compared against their spliced forms; a
// loop's first child is ignored either way.
inline TraceSet enumerate_traces(const CptNode& node, int loop_bound,
                                 std::size_t cap = kDefaultTraceCap, bool checked = true) {
    if (loop_bound < 0) throw std::invalid_argument("loop_bound must be >= 0");
    if (checked) {
        if (auto v = validate(node); !v.empty())
            throw InvalidTree("enumerate_traces: tree has violations, first: " + v.front().rule);
    }
    return detail::traces_rec(node, loop_bound, cap);
}

inline bool trace_equivalent(const CptNode& x, const CptNode& y, int loop_bound,
                             std::size_t cap = kDefaultTraceCap, bool checked = true) {
    return enumerate_traces(x, loop_bound, cap, checked) ==
           enumerate_traces(y, loop_bound, cap, checked);
}

}  // namespace cpts
