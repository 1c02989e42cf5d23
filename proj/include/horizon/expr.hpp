#pragma once

// Small arithmetic expression language for scalar fields of (x, y).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'x' | 'y' | name | func '(' expr ')' | '(' expr ')'
//   func    := sqrt | exp | sin | cos | atan
//
// `name` is looked up in the parameter map given to parse(); `pi` is built in.
// Expressions are immutable and can be differentiated symbolically.

#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace horizon {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

class Expr {
public:
    enum class Op { Constant, VarX, VarY, Add, Sub, Mul, Div, Pow, Neg, Sqrt, Exp, Sin, Cos, Atan };

    Expr() = default;

    static Expr constant(double value);
    static Expr x();
    static Expr y();

    double operator()(double x, double y) const;
    double operator()(const Eigen::Vector2d& p) const { return (*this)(p.x(), p.y()); }

    Expr diff_x() const;
    Expr diff_y() const;

    bool empty() const { return !node_; }
    Op op() const;
    bool is_constant(double value) const;
    std::string to_string() const;

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);
    friend Expr pow(const Expr& a, const Expr& b);
    friend Expr apply(Op fn, const Expr& a);

    /// Opaque tree node; defined in expr.cpp.
    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    Expr diff(int var) const;

    std::shared_ptr<const Node> node_;
};

Expr parse_expr(const std::string& text, const std::map<std::string, double>& parameters = {});

}  // namespace horizon
