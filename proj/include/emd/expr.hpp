#pragma once

#include <memory>
#include <string>

#include "emd/common.hpp"

namespace emd {

struct ParseError : Error {
    ParseError(const std::string& msg, int line, int column);
    int line;
    int column;
};

enum class Op { Num, Imag, Tau, ConjTau, Coord, Neg, Add, Sub, Mul, Div, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Node of an immutable expression tree. `value` holds Num literals (always >= 0 from the parser),
/// `index` holds the 0-based coordinate of Coord or the exponent of Pow.
struct Node {
    Op op;
    double value = 0.0;
    int index = 0;
    NodePtr lhs, rhs;
};

class Expr {
public:
    Expr() = default;
    explicit Expr(NodePtr n) : node_(std::move(n)) {}

    static Expr num(double v);
    static Expr imag();
    static Expr tau();
    static Expr conj_tau();
    static Expr coord(int k);

    const Node& node() const { return *node_; }
    bool valid() const { return static_cast<bool>(node_); }

    friend Expr operator-(const Expr& a);
    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr pow(const Expr& a, int m);

private:
    NodePtr node_;
};

/// Parses one expression; error columns are 1-based and shifted by `column_offset`.
Expr parse_expr(const std::string& text, int line = 1, int column_offset = 0);
std::string to_string(const Expr& e);
bool structurally_equal(const Expr& a, const Expr& b);

/// Largest coordinate index used (1-based), 2 if tau appears, 0 for constants.
int coords_needed(const Expr& e);

/// Evaluates at real coordinates x (tau = x[0] + i x[1]); throws PoleError on near-zero divisors.
cplx evaluate(const Expr& e, const Vec& x);

/// d/dx_k of e (0-based k), by tree differentiation with tau = x0 + i x1, conj(tau) = x0 - i x1.
Expr derivative(const Expr& e, int k);

/// Structural zero test of the derivative builder's folded constants.
bool is_zero(const Expr& e);

}  // namespace emd
