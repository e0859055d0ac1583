#include "hddb/predicate.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

namespace hddb {

namespace {

enum class TokKind { Ident, Number, String, Op, LParen, RParen, End };

struct Token {
    TokKind kind;
    std::string text;   // ident/op text, unescaped string body, number lexeme
    double value = 0;   // numbers
    size_t begin = 0, end = 0;
};

struct Lexer {
    const std::string& src;
    size_t pos = 0;

    explicit Lexer(const std::string& s) : src(s) {}

    Token next() {
        while (pos < src.size() && std::isspace(uint8_t(src[pos]))) ++pos;
        size_t begin = pos;
        if (pos >= src.size()) return {TokKind::End, "", 0, begin, begin};
        char c = src[pos];
        if (c == '(') { ++pos; return {TokKind::LParen, "(", 0, begin, pos}; }
        if (c == ')') { ++pos; return {TokKind::RParen, ")", 0, begin, pos}; }
        if (c == '=' ) { ++pos; return {TokKind::Op, "=", 0, begin, pos}; }
        if (c == '<' || c == '>') {
            ++pos;
            std::string op(1, c);
            if (pos < src.size() && src[pos] == '=') { op += '='; ++pos; }
            return {TokKind::Op, op, 0, begin, pos};
        }
        if (c == '\'') {
            ++pos;
            std::string body;
            while (true) {
                if (pos >= src.size()) throw ParseError("unterminated string literal", begin);
                if (src[pos] == '\'') {
                    if (pos + 1 < src.size() && src[pos + 1] == '\'') {
                        body.push_back('\'');
                        pos += 2;
                    } else {
                        ++pos;
                        break;
                    }
                } else {
                    body.push_back(src[pos++]);
                }
            }
            return {TokKind::String, body, 0, begin, pos};
        }
        if (std::isdigit(uint8_t(c)) || c == '-' || c == '+' ||
            (c == '.' && pos + 1 < src.size() && std::isdigit(uint8_t(src[pos + 1])))) {
            size_t start = pos;
            if (c == '-' || c == '+') ++pos;
            bool any_digit = false;
            while (pos < src.size() &&
                   (std::isdigit(uint8_t(src[pos])) || src[pos] == '.')) {
                any_digit |= std::isdigit(uint8_t(src[pos])) != 0;
                ++pos;
            }
            if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
                ++pos;
                if (pos < src.size() && (src[pos] == '-' || src[pos] == '+')) ++pos;
                while (pos < src.size() && std::isdigit(uint8_t(src[pos]))) ++pos;
            }
            std::string lexeme = src.substr(start, pos - start);
            if (!any_digit) throw ParseError("malformed number '" + lexeme + "'", start);
            char* endp = nullptr;
            double v = std::strtod(lexeme.c_str(), &endp);
            if (endp != lexeme.c_str() + lexeme.size())
                throw ParseError("malformed number '" + lexeme + "'", start);
            return {TokKind::Number, lexeme, v, start, pos};
        }
        if (std::isalpha(uint8_t(c)) || c == '_') {
            size_t start = pos;
            while (pos < src.size() &&
                   (std::isalnum(uint8_t(src[pos])) || src[pos] == '_')) ++pos;
            return {TokKind::Ident, src.substr(start, pos - start), 0, start, pos};
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos);
    }
};

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return char(std::toupper(c)); });
    return s;
}

struct Parser {
    Lexer lexer;
    Token tok;
    const EncodingPlan& plan;

    Parser(const std::string& text, const EncodingPlan& p) : lexer(text), plan(p) {
        tok = lexer.next();
    }

    void advance() { tok = lexer.next(); }

    bool is_keyword(const char* kw) const {
        return tok.kind == TokKind::Ident && upper(tok.text) == kw;
    }

    [[noreturn]] void fail(const std::string& expected) const {
        throw ParseError("expected " + expected, tok.begin);
    }

    Predicate parse() {
        Predicate p = parse_or();
        if (tok.kind != TokKind::End) fail("end of input");
        return p;
    }

    Predicate parse_or() {
        Predicate left = parse_and();
        while (is_keyword("OR")) {
            advance();
            Predicate right = parse_and();
            auto node = std::make_unique<PredicateNode>();
            node->kind = PredicateNode::Kind::Or;
            node->span_begin = left->span_begin;
            node->span_end = right->span_end;
            node->left = std::move(left);
            node->right = std::move(right);
            left = std::move(node);
        }
        return left;
    }

    Predicate parse_and() {
        Predicate left = parse_primary();
        while (is_keyword("AND")) {
            advance();
            Predicate right = parse_primary();
            auto node = std::make_unique<PredicateNode>();
            node->kind = PredicateNode::Kind::And;
            node->span_begin = left->span_begin;
            node->span_end = right->span_end;
            node->left = std::move(left);
            node->right = std::move(right);
            left = std::move(node);
        }
        return left;
    }

    Predicate parse_primary() {
        if (tok.kind == TokKind::LParen) {
            advance();
            Predicate inner = parse_or();
            if (tok.kind != TokKind::RParen) fail("')'");
            advance();
            return inner;
        }
        return parse_leaf();
    }

    double expect_number() {
        if (tok.kind != TokKind::Number) fail("number");
        double v = tok.value;
        advance();
        return v;
    }

    Predicate parse_leaf() {
        if (tok.kind != TokKind::Ident) fail("column name");
        std::string name = tok.text;
        size_t name_begin = tok.begin;
        auto col = plan.column_index(name);
        if (!col) throw ParseError("unknown column '" + name + "'", name_begin);
        bool is_string = plan.columns[*col].kind == ColumnKind::String;
        advance();

        auto node = std::make_unique<PredicateNode>();
        node->kind = PredicateNode::Kind::Leaf;
        node->column = *col;
        node->column_name = name;
        node->span_begin = name_begin;

        if (is_keyword("BETWEEN")) {
            size_t op_begin = tok.begin;
            if (is_string)
                throw ParseError("BETWEEN applied to string column '" + name + "'", op_begin);
            advance();
            node->op = LeafOp::Between;
            node->num_lo = expect_number();
            if (!is_keyword("AND")) fail("AND");
            advance();
            size_t hi_begin = tok.begin;
            node->num_hi = expect_number();
            if (node->num_lo > node->num_hi)
                throw ParseError("BETWEEN bounds out of order (" + std::to_string(node->num_lo) +
                                     " > " + std::to_string(node->num_hi) + ")",
                                 hi_begin);
            node->span_end = lexer.pos;
            return node;
        }

        if (tok.kind != TokKind::Op) fail("comparison operator");
        std::string op = tok.text;
        size_t op_begin = tok.begin;
        advance();

        if (op == "=") {
            if (tok.kind == TokKind::String) {
                if (!is_string)
                    throw ParseError("string literal compared against numeric column '" + name +
                                         "'",
                                     tok.begin);
                node->op = LeafOp::EqStr;
                node->str_value = tok.text;
                node->span_end = tok.end;
                advance();
                return node;
            }
            if (tok.kind == TokKind::Number) {
                if (is_string)
                    throw ParseError("numeric literal compared against string column '" + name +
                                         "'",
                                     tok.begin);
                node->op = LeafOp::EqNum;
                node->num_lo = tok.value;
                node->span_end = tok.end;
                advance();
                return node;
            }
            fail("string or number literal");
        }

        // Ordered comparisons are numeric-only.
        if (is_string)
            throw ParseError("operator '" + op + "' applied to string column '" + name + "'",
                             op_begin);
        if (op == "<") node->op = LeafOp::Lt;
        else if (op == "<=") node->op = LeafOp::Le;
        else if (op == ">") node->op = LeafOp::Gt;
        else if (op == ">=") node->op = LeafOp::Ge;
        else fail("comparison operator");
        size_t lit_end = tok.end;
        node->num_lo = expect_number();
        node->span_end = lit_end;
        return node;
    }
};

std::string format_number(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

}  // namespace

Predicate parse_predicate(const std::string& text, const EncodingPlan& plan) {
    Parser parser(text, plan);
    return parser.parse();
}

std::string to_string(const PredicateNode& node) {
    switch (node.kind) {
        case PredicateNode::Kind::And:
            return "(" + to_string(*node.left) + " AND " + to_string(*node.right) + ")";
        case PredicateNode::Kind::Or:
            return "(" + to_string(*node.left) + " OR " + to_string(*node.right) + ")";
        case PredicateNode::Kind::Leaf:
            break;
    }
    switch (node.op) {
        case LeafOp::EqStr: {
            std::string escaped;
            for (char c : node.str_value) {
                escaped.push_back(c);
                if (c == '\'') escaped.push_back('\'');
            }
            return node.column_name + " = '" + escaped + "'";
        }
        case LeafOp::EqNum: return node.column_name + " = " + format_number(node.num_lo);
        case LeafOp::Lt: return node.column_name + " < " + format_number(node.num_lo);
        case LeafOp::Le: return node.column_name + " <= " + format_number(node.num_lo);
        case LeafOp::Gt: return node.column_name + " > " + format_number(node.num_lo);
        case LeafOp::Ge: return node.column_name + " >= " + format_number(node.num_lo);
        case LeafOp::Between:
            return node.column_name + " BETWEEN " + format_number(node.num_lo) + " AND " +
                   format_number(node.num_hi);
    }
    return "";
}

namespace {
void collect_columns(const PredicateNode& node, std::vector<uint32_t>& out) {
    if (node.kind == PredicateNode::Kind::Leaf) {
        if (std::find(out.begin(), out.end(), node.column) == out.end())
            out.push_back(node.column);
        return;
    }
    collect_columns(*node.left, out);
    collect_columns(*node.right, out);
}
}  // namespace

std::vector<uint32_t> referenced_columns(const PredicateNode& node) {
    std::vector<uint32_t> out;
    collect_columns(node, out);
    return out;
}

AggFunction agg_from_name(const std::string& name) {
    std::string u = upper(name);
    if (u == "COUNT") return AggFunction::Count;
    if (u == "SUM") return AggFunction::Sum;
    if (u == "AVG") return AggFunction::Avg;
    if (u == "MIN") return AggFunction::Min;
    if (u == "MAX") return AggFunction::Max;
    throw DomainError("unknown aggregation function '" + name + "'");
}

std::string agg_name(AggFunction f) {
    switch (f) {
        case AggFunction::Count: return "COUNT";
        case AggFunction::Sum: return "SUM";
        case AggFunction::Avg: return "AVG";
        case AggFunction::Min: return "MIN";
        case AggFunction::Max: return "MAX";
    }
    return "";
}

uint32_t AggregationSpec::resolve(const EncodingPlan& plan) const {
    if (function == AggFunction::Count) return uint32_t(-1);
    auto idx = plan.column_index(column);
    if (!idx) throw DomainError("unknown aggregation column '" + column + "'");
    if (plan.columns[*idx].kind != ColumnKind::Numeric)
        throw DomainError("aggregation " + agg_name(function) +
                          " requires a numeric column, '" + column + "' is a string column");
    return *idx;
}

}  // namespace hddb
