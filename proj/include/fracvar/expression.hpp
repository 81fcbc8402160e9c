#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

namespace fracvar {

struct ExprError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Parsed arithmetic expression in the variables x and y.
///
/// Grammar (hand-written recursive descent):
///   expr    := term  (('+'|'-') term)*
///   term    := factor (('*'|'/') factor)*
///   factor  := ('-'|'+') factor | power
///   power   := atom ('^' factor)?          (right-associative)
///   atom    := number | 'x' | 'y' | ('sin'|'cos'|'exp') '(' expr ')' | '(' expr ')'
class Expression {
public:
    static Expression parse(const std::string& text) {
        Parser p{text, 0};
        Node root = p.parse_expr();
        p.skip_ws();
        if (p.pos != text.size())
            throw ExprError("unexpected trailing input at position " + std::to_string(p.pos) +
                            " in expression: " + text);
        return Expression(std::move(root));
    }

    double eval(double x, double y) const { return eval_node(*root_, x, y); }

private:
    enum class Op { number, var_x, var_y, add, sub, mul, div, pow, neg, sin, cos, exp };

    struct NodeData;
    using Node = std::unique_ptr<NodeData>;
    struct NodeData {
        Op op;
        double number = 0.0;
        Node lhs;
        Node rhs;
    };

    explicit Expression(Node root) : root_(std::move(root)) {}

    static double eval_node(const NodeData& n, double x, double y) {
        switch (n.op) {
            case Op::number: return n.number;
            case Op::var_x: return x;
            case Op::var_y: return y;
            case Op::add: return eval_node(*n.lhs, x, y) + eval_node(*n.rhs, x, y);
            case Op::sub: return eval_node(*n.lhs, x, y) - eval_node(*n.rhs, x, y);
            case Op::mul: return eval_node(*n.lhs, x, y) * eval_node(*n.rhs, x, y);
            case Op::div: return eval_node(*n.lhs, x, y) / eval_node(*n.rhs, x, y);
            case Op::pow: return std::pow(eval_node(*n.lhs, x, y), eval_node(*n.rhs, x, y));
            case Op::neg: return -eval_node(*n.lhs, x, y);
            case Op::sin: return std::sin(eval_node(*n.lhs, x, y));
            case Op::cos: return std::cos(eval_node(*n.lhs, x, y));
            case Op::exp: return std::exp(eval_node(*n.lhs, x, y));
        }
        throw ExprError("corrupt expression node");
    }

    struct Parser {
        const std::string& s;
        std::size_t pos;

        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool eat(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        [[noreturn]] void fail(const std::string& what) const {
            throw ExprError(what + " at position " + std::to_string(pos) + " in expression: " + s);
        }

        static Node make(Op op, Node lhs = nullptr, Node rhs = nullptr) {
            auto n = std::make_unique<NodeData>();
            n->op = op;
            n->lhs = std::move(lhs);
            n->rhs = std::move(rhs);
            return n;
        }

        Node parse_expr() {
            Node lhs = parse_term();
            for (;;) {
                if (eat('+')) lhs = make(Op::add, std::move(lhs), parse_term());
                else if (eat('-')) lhs = make(Op::sub, std::move(lhs), parse_term());
                else return lhs;
            }
        }

        Node parse_term() {
            Node lhs = parse_factor();
            for (;;) {
                if (eat('*')) lhs = make(Op::mul, std::move(lhs), parse_factor());
                else if (eat('/')) lhs = make(Op::div, std::move(lhs), parse_factor());
                else return lhs;
            }
        }

        Node parse_factor() {
            if (eat('-')) return make(Op::neg, parse_factor());
            if (eat('+')) return parse_factor();
            return parse_power();
        }

        Node parse_power() {
            Node base = parse_atom();
            if (eat('^')) return make(Op::pow, std::move(base), parse_factor());
            return base;
        }

        Node parse_atom() {
            skip_ws();
            if (pos >= s.size()) fail("unexpected end of expression");
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
            if (c == '(') {
                ++pos;
                Node inner = parse_expr();
                if (!eat(')')) fail("missing closing parenthesis");
                return inner;
            }
            fail(std::string("unexpected character '") + c + "'");
        }

        Node parse_number() {
            const std::size_t start = pos;
            while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.'))
                ++pos;
            if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
                std::size_t look = pos + 1;
                if (look < s.size() && (s[look] == '+' || s[look] == '-')) ++look;
                if (look < s.size() && std::isdigit(static_cast<unsigned char>(s[look]))) {
                    pos = look;
                    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
                }
            }
            const std::string tok = s.substr(start, pos - start);
            try {
                std::size_t used = 0;
                const double v = std::stod(tok, &used);
                if (used != tok.size()) fail("malformed number '" + tok + "'");
                auto n = make(Op::number);
                n->number = v;
                return n;
            } catch (const std::logic_error&) {
                fail("malformed number '" + tok + "'");
            }
        }

        Node parse_ident() {
            const std::size_t start = pos;
            while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
            const std::string name = s.substr(start, pos - start);
            if (name == "x") return make(Op::var_x);
            if (name == "y") return make(Op::var_y);
            if (name == "sin" || name == "cos" || name == "exp") {
                if (!eat('(')) fail("function '" + name + "' needs parentheses");
                Node arg = parse_expr();
                if (!eat(')')) fail("missing closing parenthesis after '" + name + "'");
                return make(name == "sin" ? Op::sin : name == "cos" ? Op::cos : Op::exp,
                            std::move(arg));
            }
            pos = start;
            fail("unknown identifier '" + name + "' (allowed: x, y, sin, cos, exp)");
        }
    };

    Node root_;
};

} // namespace fracvar
