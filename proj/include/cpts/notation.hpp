#pragma once

// Textual CPT notation: recursive-descent parser and canonical serializer.
//
// Grammar (docs/notation.ebnf):
//   tree      := activity | condition | seq | par | xor | loop ;
//   seq       := ("seq"|"→") "(" tree ("," tree)+ ")" ;
//   par       := ("par"|"∧") "(" tree ("," tree)+ ")" ;
//   xor       := ("xor"|"×") "_" condition "(" tree "," tree ")" ;
//   loop      := ("loop"|"∝") "(" condition "," tree ")" ;
//   activity  := "a" "_"? digits ; condition := "c" "_"? digits ;

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cpts/core.hpp"

namespace cpts {

struct SourceSpan {
    std::size_t start = 0;
    std::size_t end = 0;
};

class ParseError : public std::runtime_error {
  public:
    enum class Kind { UnexpectedToken, ArityMismatch, UnknownOperator, BadLabel, UnbalancedParen };

    ParseError(Kind kind, SourceSpan span, const std::string& message)
        : std::runtime_error(message + " (at byte " + std::to_string(span.start) + ")"),
          kind_(kind),
          span_(span) {}

    Kind kind() const { return kind_; }
    SourceSpan span() const { return span_; }

  private:
    Kind kind_;
    SourceSpan span_;
};

enum class NotationStyle { Ascii, Unicode };

namespace detail {

class Parser {
  public:
    explicit Parser(std::string_view text) : text_(text) {}

    CptNode parse() {
        skip_ws();
        if (pos_ >= text_.size())
            fail(ParseError::Kind::UnexpectedToken, pos_, "empty input");
        CptNode tree = parse_tree();
        skip_ws();
        if (pos_ < text_.size())
            fail(ParseError::Kind::UnexpectedToken, pos_,
                 "trailing input after complete tree");
        return tree;
    }

  private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(ParseError::Kind kind, std::size_t at, const std::string& msg) {
        throw ParseError(kind, {at, std::min(at + 1, text_.size())}, msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() &&
               (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                text_[pos_] == '\r'))
            ++pos_;
    }

    bool try_eat(std::string_view tok) {
        if (text_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    void expect(char c, ParseError::Kind kind) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c)
            fail(kind, pos_, std::string("expected '") + c + "'");
        ++pos_;
    }

    // Reads a_1 / a1 / c_1 / c1 and normalizes to underscore form.
    std::string parse_label(char prefix) {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ >= text_.size() || text_[pos_] != prefix)
            fail(ParseError::Kind::BadLabel, pos_,
                 std::string("expected label starting with '") + prefix + "'");
        ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '_') ++pos_;
        std::size_t dstart = pos_;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
        if (pos_ == dstart)
            fail(ParseError::Kind::BadLabel, start, "label is missing its number");
        std::string digits(text_.substr(dstart, pos_ - dstart));
        std::string label = std::string(1, prefix) + "_" + digits;
        if (!detail::is_numbered_label(label, prefix))
            fail(ParseError::Kind::BadLabel, start, "malformed label '" + label + "'");
        return label;
    }

    std::vector<CptNode> parse_args(std::size_t open_at) {
        std::vector<CptNode> kids;
        kids.push_back(parse_tree());
        while (true) {
            skip_ws();
            if (pos_ >= text_.size())
                fail(ParseError::Kind::UnbalancedParen, open_at, "unclosed '('");
            if (text_[pos_] == ',') {
                ++pos_;
                kids.push_back(parse_tree());
            } else if (text_[pos_] == ')') {
                ++pos_;
                return kids;
            } else {
                fail(ParseError::Kind::UnexpectedToken, pos_, "expected ',' or ')'");
            }
        }
    }

    CptNode parse_tree() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ >= text_.size())
            fail(ParseError::Kind::UnexpectedToken, pos_, "expected a tree");

        if (try_eat("seq") || try_eat("→")) return parse_nary(OperatorKind::Sequence, start);
        if (try_eat("par") || try_eat("∧")) return parse_nary(OperatorKind::Parallel, start);
        if (try_eat("xor") || try_eat("×")) return parse_xor(start);
        if (try_eat("loop") || try_eat("∝")) return parse_loop(start);

        char c = text_[pos_];
        if (c == 'a') return {Element::activity(parse_label('a')), {}};
        if (c == 'c') return {Element::condition(parse_label('c')), {}};
        fail(ParseError::Kind::UnknownOperator, pos_,
             std::string("unknown operator or label at '") + c + "'");
    }

    CptNode parse_nary(OperatorKind kind, std::size_t start) {
        std::size_t open_at = pos_;
        expect('(', ParseError::Kind::UnexpectedToken);
        std::vector<CptNode> kids = parse_args(open_at);
        if (kids.size() < 2)
            throw ParseError(ParseError::Kind::ArityMismatch, {start, pos_},
                             std::string(operator_name(kind)) + " requires at least 2 children");
        return {Element::op_node(kind), std::move(kids)};
    }

    CptNode parse_xor(std::size_t start) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != '_')
            fail(ParseError::Kind::BadLabel, pos_, "exclusive operator requires '_c<n>' condition");
        ++pos_;
        std::string cond = parse_label('c');
        std::size_t open_at = pos_;
        expect('(', ParseError::Kind::UnexpectedToken);
        std::vector<CptNode> kids = parse_args(open_at);
        if (kids.size() != 2)
            throw ParseError(ParseError::Kind::ArityMismatch, {start, pos_},
                             "exclusive requires exactly 2 children");
        return {Element::op_node(OperatorKind::Exclusive, std::move(cond)), std::move(kids)};
    }

    CptNode parse_loop(std::size_t start) {
        std::size_t open_at = pos_;
        expect('(', ParseError::Kind::UnexpectedToken);
        std::string cond = parse_label('c');
        expect(',', ParseError::Kind::UnexpectedToken);
        CptNode body = parse_tree();
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',')
            throw ParseError(ParseError::Kind::ArityMismatch, {start, pos_},
                             "loop takes exactly (condition, body)");
        if (pos_ >= text_.size() || text_[pos_] != ')')
            fail(ParseError::Kind::UnbalancedParen, open_at, "unclosed '('");
        ++pos_;
        CptNode cond_leaf{Element::condition(std::move(cond)), {}};
        return {Element::op_node(OperatorKind::Loop), {std::move(cond_leaf), std::move(body)}};
    }
};

inline void serialize_rec(const CptNode& node, NotationStyle style, std::string& out) {
    const Element& e = node.element;
    switch (e.type) {
        case Element::Type::Activity:
        case Element::Type::Condition: out += e.label; return;
        case Element::Type::Silent: out += "tau"; return;
        case Element::Type::Operator: break;
    }
    const bool uni = style == NotationStyle::Unicode;
    switch (e.op) {
        case OperatorKind::Sequence: out += uni ? "→" : "seq"; break;
        case OperatorKind::Parallel: out += uni ? "∧" : "par"; break;
        case OperatorKind::Exclusive:
            out += uni ? "×" : "xor";
            out += '_';
            out += e.label;
            break;
        case OperatorKind::Loop: out += uni ? "∝" : "loop"; break;
    }
    out += '(';
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        if (i) out += ',';
        serialize_rec(node.children[i], style, out);
    }
    out += ')';
}

}  // namespace detail

inline CptNode parse(std::string_view text) { return detail::Parser(text).parse(); }

inline std::string serialize(const CptNode& node, NotationStyle style = NotationStyle::Ascii) {
    if (auto v = validate(node); !v.empty())
        throw InvalidTree("serialize: tree has violations, first: " + v.front().rule);
    std::string out;
    detail::serialize_rec(node, style, out);
    return out;
}

}  // namespace cpts
