#include "qnls/expression.hpp"

#include <cctype>
#include <cstdlib>

#include "qnls/errors.hpp"

namespace qnls {

struct Expression::Node {
    enum Kind { constant, variable, add, mul, power } kind;
    cplx value{0.0, 0.0};
    int var = 0;
    int exponent = 0;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

NodePtr make_const(cplx v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::constant;
    n->value = v;
    return n;
}

NodePtr make_var(int id) {
    auto n = std::make_shared<Node>();
    n->kind = Node::variable;
    n->var = id;
    return n;
}

bool is_const(const NodePtr& n, cplx v) { return n->kind == Node::constant && n->value == v; }

NodePtr make_add(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    if (a->kind == Node::constant && b->kind == Node::constant) return make_const(a->value + b->value);
    auto n = std::make_shared<Node>();
    n->kind = Node::add;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_mul(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    if (a->kind == Node::constant && b->kind == Node::constant) return make_const(a->value * b->value);
    auto n = std::make_shared<Node>();
    n->kind = Node::mul;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_pow(NodePtr a, int e) {
    if (e == 0) return make_const(1.0);
    if (e == 1) return a;
    if (a->kind == Node::constant) {
        cplx v(1.0, 0.0);
        for (int i = 0; i < e; ++i) v *= a->value;
        return make_const(v);
    }
    auto n = std::make_shared<Node>();
    n->kind = Node::power;
    n->a = std::move(a);
    n->exponent = e;
    return n;
}

int conj_var(int id) {
    if (id == Expression::kU) return Expression::kUbar;
    if (id == Expression::kUbar) return Expression::kU;
    if (id >= 2 && id < 5) return id + 3;
    return id - 3;
}

NodePtr conj_node(const NodePtr& n) {
    switch (n->kind) {
        case Node::constant: return make_const(std::conj(n->value));
        case Node::variable: return make_var(conj_var(n->var));
        case Node::add: return make_add(conj_node(n->a), conj_node(n->b));
        case Node::mul: return make_mul(conj_node(n->a), conj_node(n->b));
        case Node::power: return make_pow(conj_node(n->a), n->exponent);
    }
    return n;
}

NodePtr diff_node(const NodePtr& n, int v) {
    switch (n->kind) {
        case Node::constant: return make_const(0.0);
        case Node::variable: return make_const(n->var == v ? 1.0 : 0.0);
        case Node::add: return make_add(diff_node(n->a, v), diff_node(n->b, v));
        case Node::mul:
            return make_add(make_mul(diff_node(n->a, v), n->b), make_mul(n->a, diff_node(n->b, v)));
        case Node::power:
            return make_mul(make_mul(make_const(static_cast<double>(n->exponent)), make_pow(n->a, n->exponent - 1)),
                            diff_node(n->a, v));
    }
    return make_const(0.0);
}

cplx eval_node(const Node& n, const PointState& p) {
    switch (n.kind) {
        case Node::constant: return n.value;
        case Node::variable:
            if (n.var == Expression::kU) return p.y;
            if (n.var == Expression::kUbar) return std::conj(p.y);
            if (n.var < 5) return p.z[n.var - 2];
            return std::conj(p.z[n.var - 5]);
        case Node::add: return eval_node(*n.a, p) + eval_node(*n.b, p);
        case Node::mul: return eval_node(*n.a, p) * eval_node(*n.b, p);
        case Node::power: {
            cplx base = eval_node(*n.a, p), v(1.0, 0.0);
            for (int i = 0; i < n.exponent; ++i) v *= base;
            return v;
        }
    }
    return 0.0;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError("expression \"" + s_ + "\" at offset " + std::to_string(pos_) + ": " + what);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr e = term();
        for (;;) {
            if (accept('+'))
                e = make_add(e, term());
            else if (accept('-'))
                e = make_add(e, make_mul(make_const(-1.0), term()));
            else
                return e;
        }
    }

    NodePtr term() {
        NodePtr e = factor();
        while (accept('*')) e = make_mul(e, factor());
        return e;
    }

    NodePtr factor() {
        if (accept('-')) return make_mul(make_const(-1.0), factor());
        NodePtr base = atom();
        if (accept('^')) {
            skip();
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) fail("expected a non-negative integer exponent");
            base = make_pow(base, std::atoi(s_.substr(start, pos_ - start).c_str()));
        }
        return base;
    }

    NodePtr atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            double v = std::strtod(s_.c_str() + pos_, &end);
            pos_ = static_cast<std::size_t>(end - s_.c_str());
            return make_const(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            std::string id = s_.substr(start, pos_ - start);
            if (id == "re" || id == "im" || id == "conj") {
                if (!accept('(')) fail("expected '(' after " + id);
                NodePtr inner = expr();
                if (!accept(')')) fail("expected ')'");
                NodePtr c2 = conj_node(inner);
                if (id == "conj") return c2;
                if (id == "re") return make_mul(make_const(0.5), make_add(inner, c2));
                return make_mul(make_const(cplx(0.0, -0.5)), make_add(inner, make_mul(make_const(-1.0), c2)));
            }
            if (id == "I") return make_const(cplx(0.0, 1.0));
            if (id == "u") return make_var(Expression::kU);
            if (id == "ubar") return make_var(Expression::kUbar);
            if (id.size() == 3 && id.rfind("du", 0) == 0 && id[2] >= '1' && id[2] <= '3')
                return make_var(Expression::du(id[2] - '1'));
            if (id.size() == 6 && id.rfind("dubar", 0) == 0 && id[5] >= '1' && id[5] <= '3')
                return make_var(Expression::dubar(id[5] - '1'));
            fail("unknown identifier '" + id + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : root_(make_const(0.0)), source_("0") {}
Expression::Expression(std::shared_ptr<const Node> root, std::string source)
    : root_(std::move(root)), source_(std::move(source)) {}

Expression Expression::parse(const std::string& text) { return Expression(Parser(text).parse(), text); }

cplx Expression::evaluate(const PointState& p) const { return eval_node(*root_, p); }

Expression Expression::derivative(int variable) const {
    return Expression(diff_node(root_, variable), "d(" + source_ + ")");
}

Expression Expression::conjugate() const { return Expression(conj_node(root_), "conj(" + source_ + ")"); }

bool Expression::is_zero() const { return is_const(root_, 0.0); }

}  // namespace qnls
