#include "gsde/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "gsde/errors.hpp"

namespace gsde {

struct Expr::Node {
    enum class Kind { constant, variable, add, sub, mul, div, neg, tanh_fn, exp_fn, abs_fn, min_fn, max_fn };
    Kind kind = Kind::constant;
    double value = 0.0;
    int var = 0; // 0:t 1:x 2:y 3:z
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Kind = Expr::Node::Kind;

NodePtr make(Kind kind, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = kind;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

struct Parser {
    const std::string& text;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError("expression error at position " + std::to_string(pos) + ": " + why +
                          " in \"" + text + "\"");
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        while (true) {
            if (eat('+')) {
                lhs = make(Kind::add, lhs, parse_term());
            } else if (eat('-')) {
                lhs = make(Kind::sub, lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        while (true) {
            if (eat('*')) {
                lhs = make(Kind::mul, lhs, parse_unary());
            } else if (eat('/')) {
                lhs = make(Kind::div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (eat('-')) return make(Kind::neg, parse_unary());
        return parse_primary();
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        const char c = text[pos];
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_expr();
            if (!eat(')')) fail("missing ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(text.c_str() + pos, &end);
            if (end == text.c_str() + pos) fail("bad number");
            pos = static_cast<std::size_t>(end - text.c_str());
            auto n = std::make_shared<Expr::Node>();
            n->kind = Kind::constant;
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            while (pos < text.size() &&
                   std::isalnum(static_cast<unsigned char>(text[pos]))) {
                ++pos;
            }
            const std::string name = text.substr(start, pos - start);
            if (name.size() == 1 && (name[0] == 't' || name[0] == 'x' || name[0] == 'y' ||
                                     name[0] == 'z')) {
                auto n = std::make_shared<Expr::Node>();
                n->kind = Kind::variable;
                n->var = name[0] == 't' ? 0 : name[0] == 'x' ? 1 : name[0] == 'y' ? 2 : 3;
                return n;
            }
            if (!eat('(')) fail("unknown identifier '" + name + "'");
            NodePtr first = parse_expr();
            if (name == "tanh" || name == "exp" || name == "abs") {
                if (!eat(')')) fail("missing ')'");
                const Kind k = name == "tanh" ? Kind::tanh_fn
                               : name == "exp" ? Kind::exp_fn
                                               : Kind::abs_fn;
                return make(k, first);
            }
            if (name == "min" || name == "max") {
                if (!eat(',')) fail("min/max need two arguments");
                NodePtr second = parse_expr();
                if (!eat(')')) fail("missing ')'");
                return make(name == "min" ? Kind::min_fn : Kind::max_fn, first, second);
            }
            fail("unknown function '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

double eval_node(const Expr::Node& n, double t, double x, double y, double z) {
    switch (n.kind) {
        case Kind::constant: return n.value;
        case Kind::variable:
            switch (n.var) {
                case 0: return t;
                case 1: return x;
                case 2: return y;
                default: return z;
            }
        case Kind::add: return eval_node(*n.a, t, x, y, z) + eval_node(*n.b, t, x, y, z);
        case Kind::sub: return eval_node(*n.a, t, x, y, z) - eval_node(*n.b, t, x, y, z);
        case Kind::mul: return eval_node(*n.a, t, x, y, z) * eval_node(*n.b, t, x, y, z);
        case Kind::div: return eval_node(*n.a, t, x, y, z) / eval_node(*n.b, t, x, y, z);
        case Kind::neg: return -eval_node(*n.a, t, x, y, z);
        case Kind::tanh_fn: return std::tanh(eval_node(*n.a, t, x, y, z));
        case Kind::exp_fn: return std::exp(eval_node(*n.a, t, x, y, z));
        case Kind::abs_fn: return std::fabs(eval_node(*n.a, t, x, y, z));
        case Kind::min_fn:
            return std::min(eval_node(*n.a, t, x, y, z), eval_node(*n.b, t, x, y, z));
        case Kind::max_fn:
            return std::max(eval_node(*n.a, t, x, y, z), eval_node(*n.b, t, x, y, z));
    }
    return 0.0;
}

} // namespace

Expr Expr::parse(const std::string& text) {
    Parser parser{text};
    NodePtr root = parser.parse_expr();
    parser.skip_ws();
    if (parser.pos != text.size()) parser.fail("trailing input");
    Expr e;
    e.root_ = std::move(root);
    e.text_ = text;
    return e;
}

double Expr::eval(double t, double x, double y, double z) const {
    if (!root_) throw ConfigError("evaluating an empty expression");
    return eval_node(*root_, t, x, y, z);
}

} // namespace gsde
