#include "horizon/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace horizon {

struct Expr::Node {
    Op op;
    double value = 0.0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

bool is_function(Expr::Op op) {
    switch (op) {
        case Expr::Op::Sqrt:
        case Expr::Op::Exp:
        case Expr::Op::Sin:
        case Expr::Op::Cos:
        case Expr::Op::Atan:
            return true;
        default:
            return false;
    }
}

const char* function_name(Expr::Op op) {
    switch (op) {
        case Expr::Op::Sqrt: return "sqrt";
        case Expr::Op::Exp: return "exp";
        case Expr::Op::Sin: return "sin";
        case Expr::Op::Cos: return "cos";
        case Expr::Op::Atan: return "atan";
        default: return "?";
    }
}

}  // namespace

Expr Expr::constant(double value) {
    return Expr(std::make_shared<const Node>(Node{Op::Constant, value, nullptr, nullptr}));
}

Expr Expr::x() { return Expr(std::make_shared<const Node>(Node{Op::VarX, 0.0, nullptr, nullptr})); }
Expr Expr::y() { return Expr(std::make_shared<const Node>(Node{Op::VarY, 0.0, nullptr, nullptr})); }

Expr::Op Expr::op() const { return node_->op; }

bool Expr::is_constant(double value) const {
    return node_ && node_->op == Op::Constant && node_->value == value;
}

// Constructors fold constants and drop neutral elements so that symbolic
// derivatives stay small enough to evaluate quickly.
Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    if (a.op() == Expr::Op::Constant && b.op() == Expr::Op::Constant)
        return Expr::constant(a.node_->value + b.node_->value);
    return Expr(std::make_shared<const Expr::Node>(Expr::Node{Expr::Op::Add, 0.0, a.node_, b.node_}));
}

Expr operator-(const Expr& a, const Expr& b) {
    if (b.is_constant(0.0)) return a;
    if (a.is_constant(0.0)) return -b;
    if (a.op() == Expr::Op::Constant && b.op() == Expr::Op::Constant)
        return Expr::constant(a.node_->value - b.node_->value);
    return Expr(std::make_shared<const Expr::Node>(Expr::Node{Expr::Op::Sub, 0.0, a.node_, b.node_}));
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    if (a.op() == Expr::Op::Constant && b.op() == Expr::Op::Constant)
        return Expr::constant(a.node_->value * b.node_->value);
    return Expr(std::make_shared<const Expr::Node>(Expr::Node{Expr::Op::Mul, 0.0, a.node_, b.node_}));
}

Expr operator/(const Expr& a, const Expr& b) {
    if (a.is_constant(0.0)) return Expr::constant(0.0);
    if (b.is_constant(1.0)) return a;
    if (a.op() == Expr::Op::Constant && b.op() == Expr::Op::Constant)
        return Expr::constant(a.node_->value / b.node_->value);
    return Expr(std::make_shared<const Expr::Node>(Expr::Node{Expr::Op::Div, 0.0, a.node_, b.node_}));
}

Expr operator-(const Expr& a) {
    if (a.op() == Expr::Op::Constant) return Expr::constant(-a.node_->value);
    if (a.op() == Expr::Op::Neg) return Expr(a.node_->lhs);
    return Expr(std::make_shared<const Expr::Node>(Expr::Node{Expr::Op::Neg, 0.0, a.node_, nullptr}));
}

Expr pow(const Expr& a, const Expr& b) {
    if (b.is_constant(1.0)) return a;
    if (b.is_constant(0.0)) return Expr::constant(1.0);
    if (a.op() == Expr::Op::Constant && b.op() == Expr::Op::Constant)
        return Expr::constant(std::pow(a.node_->value, b.node_->value));
    return Expr(std::make_shared<const Expr::Node>(Expr::Node{Expr::Op::Pow, 0.0, a.node_, b.node_}));
}

Expr apply(Expr::Op fn, const Expr& a) {
    return Expr(std::make_shared<const Expr::Node>(Expr::Node{fn, 0.0, a.node_, nullptr}));
}

namespace {

double eval_node(const Expr::Node& n, double x, double y) {
    using Op = Expr::Op;
    switch (n.op) {
        case Op::Constant: return n.value;
        case Op::VarX: return x;
        case Op::VarY: return y;
        case Op::Add: return eval_node(*n.lhs, x, y) + eval_node(*n.rhs, x, y);
        case Op::Sub: return eval_node(*n.lhs, x, y) - eval_node(*n.rhs, x, y);
        case Op::Mul: return eval_node(*n.lhs, x, y) * eval_node(*n.rhs, x, y);
        case Op::Div: return eval_node(*n.lhs, x, y) / eval_node(*n.rhs, x, y);
        case Op::Pow: {
            const double base = eval_node(*n.lhs, x, y);
            if (n.rhs->op == Op::Constant) {
                const double e = n.rhs->value;
                if (e == 2.0) return base * base;
                if (e == 3.0) return base * base * base;
                if (e == -1.0) return 1.0 / base;
                if (e == -2.0) return 1.0 / (base * base);
                return std::pow(base, e);
            }
            return std::pow(base, eval_node(*n.rhs, x, y));
        }
        case Op::Neg: return -eval_node(*n.lhs, x, y);
        case Op::Sqrt: return std::sqrt(eval_node(*n.lhs, x, y));
        case Op::Exp: return std::exp(eval_node(*n.lhs, x, y));
        case Op::Sin: return std::sin(eval_node(*n.lhs, x, y));
        case Op::Cos: return std::cos(eval_node(*n.lhs, x, y));
        case Op::Atan: return std::atan(eval_node(*n.lhs, x, y));
    }
    return std::nan("");
}

void print_node(std::ostream& os, const NodePtr& n) {
    using Op = Expr::Op;
    switch (n->op) {
        case Op::Constant: {
            std::ostringstream tmp;
            tmp.precision(17);
            tmp << n->value;
            if (n->value < 0) os << '(' << tmp.str() << ')';
            else os << tmp.str();
            return;
        }
        case Op::VarX: os << 'x'; return;
        case Op::VarY: os << 'y'; return;
        case Op::Neg: os << "(-"; print_node(os, n->lhs); os << ')'; return;
        default: break;
    }
    if (is_function(n->op)) {
        os << function_name(n->op) << '(';
        print_node(os, n->lhs);
        os << ')';
        return;
    }
    const char sym = n->op == Op::Add ? '+' : n->op == Op::Sub ? '-' : n->op == Op::Mul ? '*' : n->op == Op::Div ? '/' : '^';
    os << '(';
    print_node(os, n->lhs);
    os << sym;
    print_node(os, n->rhs);
    os << ')';
}

}  // namespace

double Expr::operator()(double x, double y) const {
    if (!node_) throw std::logic_error("evaluating an empty expression");
    return eval_node(*node_, x, y);
}

std::string Expr::to_string() const {
    if (!node_) return "";
    std::ostringstream os;
    print_node(os, node_);
    return os.str();
}

Expr Expr::diff_x() const { return diff(0); }
Expr Expr::diff_y() const { return diff(1); }

Expr Expr::diff(int var) const {
    const Node& n = *node_;
    const Expr u(n.lhs);
    const Expr v(n.rhs);
    switch (n.op) {
        case Op::Constant: return constant(0.0);
        case Op::VarX: return constant(var == 0 ? 1.0 : 0.0);
        case Op::VarY: return constant(var == 1 ? 1.0 : 0.0);
        case Op::Add: return u.diff(var) + v.diff(var);
        case Op::Sub: return u.diff(var) - v.diff(var);
        case Op::Mul: return u.diff(var) * v + u * v.diff(var);
        case Op::Div: return (u.diff(var) * v - u * v.diff(var)) / pow(v, constant(2.0));
        case Op::Neg: return -u.diff(var);
        case Op::Pow: {
            if (v.op() == Op::Constant) {
                return constant(n.rhs->value) * pow(u, constant(n.rhs->value - 1.0)) * u.diff(var);
            }
            // The grammar has no log(), so u^v with variable v has no closed form here.
            throw std::domain_error("symbolic derivative of a non-constant exponent is not supported; use jacobian=fd");
        }
        case Op::Sqrt: return u.diff(var) / (constant(2.0) * *this);
        case Op::Exp: return *this * u.diff(var);
        case Op::Sin: return apply(Op::Cos, u) * u.diff(var);
        case Op::Cos: return -(apply(Op::Sin, u) * u.diff(var));
        case Op::Atan: return u.diff(var) / (constant(1.0) + pow(u, constant(2.0)));
    }
    return constant(0.0);
}

namespace {

class Parser {
public:
    Parser(const std::string& text, const std::map<std::string, double>& parameters)
        : text_(text), parameters_(parameters) {}

    Expr parse() {
        Expr e = expr();
        skip_ws();
        if (pos_ != text_.size()) throw ParseError("unexpected '" + std::string(1, text_[pos_]) + "'", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    Expr expr() {
        Expr lhs = term();
        for (;;) {
            if (accept('+')) lhs = lhs + term();
            else if (accept('-')) lhs = lhs - term();
            else return lhs;
        }
    }

    Expr term() {
        Expr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = lhs * unary();
            else if (accept('/')) lhs = lhs / unary();
            else return lhs;
        }
    }

    Expr unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept('^')) return pow(base, unary());
        return base;
    }

    Expr primary() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
        const char c = text_[pos_];
        if (accept('(')) {
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
    }

    Expr number() {
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        const double value = std::strtod(begin, &end);
        if (end == begin) throw ParseError("malformed number", pos_);
        pos_ += static_cast<std::size_t>(end - begin);
        return Expr::constant(value);
    }

    Expr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
        const std::string name = text_.substr(start, pos_ - start);
        if (name == "x") return Expr::x();
        if (name == "y") return Expr::y();
        if (name == "pi") return Expr::constant(3.14159265358979323846);
        static const std::map<std::string, Expr::Op> functions = {
            {"sqrt", Expr::Op::Sqrt}, {"exp", Expr::Op::Exp}, {"sin", Expr::Op::Sin},
            {"cos", Expr::Op::Cos},   {"atan", Expr::Op::Atan}};
        if (auto it = functions.find(name); it != functions.end()) {
            expect('(');
            Expr arg = expr();
            expect(')');
            return apply(it->second, arg);
        }
        if (auto it = parameters_.find(name); it != parameters_.end()) return Expr::constant(it->second);
        throw ParseError("unknown identifier '" + name + "'", start);
    }

    const std::string& text_;
    const std::map<std::string, double>& parameters_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(const std::string& text, const std::map<std::string, double>& parameters) {
    return Parser(text, parameters).parse();
}

}  // namespace horizon
