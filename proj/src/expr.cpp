#include "emd/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace emd {

ParseError::ParseError(const std::string& msg, int l, int c)
    : Error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg), line(l), column(c) {}

namespace {

NodePtr make(Op op, NodePtr l = nullptr, NodePtr r = nullptr, double v = 0.0, int idx = 0) {
    return std::make_shared<const Node>(Node{op, v, idx, std::move(l), std::move(r)});
}

}  // namespace

Expr Expr::num(double v) { return Expr(make(Op::Num, nullptr, nullptr, v)); }
Expr Expr::imag() { return Expr(make(Op::Imag)); }
Expr Expr::tau() { return Expr(make(Op::Tau)); }
Expr Expr::conj_tau() { return Expr(make(Op::ConjTau)); }
Expr Expr::coord(int k) { return Expr(make(Op::Coord, nullptr, nullptr, 0.0, k)); }

Expr operator-(const Expr& a) { return Expr(make(Op::Neg, a.node_)); }
Expr operator+(const Expr& a, const Expr& b) { return Expr(make(Op::Add, a.node_, b.node_)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(make(Op::Sub, a.node_, b.node_)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(make(Op::Mul, a.node_, b.node_)); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(make(Op::Div, a.node_, b.node_)); }
Expr pow(const Expr& a, int m) { return Expr(make(Op::Pow, a.node_, nullptr, 0.0, m)); }

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
    Parser(const std::string& s, int line, int offset) : s_(s), line_(line), offset_(offset) {}

    Expr parse() {
        skip();
        if (pos_ >= s_.size()) fail("empty expression");
        Expr e = expr();
        skip();
        if (pos_ < s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, line_, offset_ + static_cast<int>(pos_) + 1);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) {
            if (pos_ >= s_.size()) fail(std::string("expected '") + c + "' but reached end of input");
            fail(std::string("expected '") + c + "'");
        }
    }

    Expr expr() {
        Expr e = term();
        for (;;) {
            if (eat('+'))
                e = e + term();
            else if (eat('-'))
                e = e - term();
            else
                return e;
        }
    }
    Expr term() {
        Expr e = unary();
        for (;;) {
            if (eat('*'))
                e = e * unary();
            else if (eat('/'))
                e = e / unary();
            else
                return e;
        }
    }
    Expr unary() {
        if (eat('-')) return -unary();
        return power();
    }
    Expr power() {
        Expr base = primary();
        if (!eat('^')) return base;
        skip();
        const bool neg = eat('-');
        skip();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("integer exponent expected");
        if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E'))
            fail("only integer exponents are allowed");
        const int m = std::atoi(s_.substr(start, pos_ - start).c_str());
        return pow(base, neg ? -m : m);
    }
    Expr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string id = s_.substr(start, pos_ - start);
            if (id == "tau") return Expr::tau();
            if (id == "i") return Expr::imag();
            if (id == "conj") {
                expect('(');
                skip();
                const std::size_t a = pos_;
                while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
                if (s_.substr(a, pos_ - a) != "tau") {
                    pos_ = a;
                    fail("conj() applies to tau only");
                }
                expect(')');
                return Expr::conj_tau();
            }
            if (id.size() >= 2 && id[0] == 'x' && id.find_first_not_of("0123456789", 1) == std::string::npos &&
                id[1] != '0')
                return Expr::coord(std::atoi(id.c_str() + 1) - 1);
            pos_ = start;
            fail("unknown symbol '" + id + "'");
        }
        fail(std::string("unexpected '") + c + "'");
    }
    Expr number() {
        const char* first = s_.data() + pos_;
        const char* last = s_.data() + s_.size();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc()) fail("malformed number");
        pos_ += static_cast<std::size_t>(ptr - first);
        return Expr::num(v);
    }

    const std::string& s_;
    int line_;
    int offset_;
    std::size_t pos_ = 0;
};

int prec(Op op) {
    switch (op) {
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Neg: return 3;
        case Op::Pow: return 4;
        default: return 5;
    }
}

std::string num_str(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void print(const Node& n, std::string& out) {
    auto wrap = [&out](const Node& c, bool paren) {
        if (paren) out += '(';
        print(c, out);
        if (paren) out += ')';
    };
    switch (n.op) {
        case Op::Num: out += num_str(n.value); return;
        case Op::Imag: out += 'i'; return;
        case Op::Tau: out += "tau"; return;
        case Op::ConjTau: out += "conj(tau)"; return;
        case Op::Coord: out += 'x' + std::to_string(n.index + 1); return;
        case Op::Neg:
            out += '-';
            wrap(*n.lhs, prec(n.lhs->op) < prec(Op::Neg));
            return;
        case Op::Pow:
            wrap(*n.lhs, prec(n.lhs->op) <= prec(Op::Pow));
            out += '^' + std::to_string(n.index);
            return;
        default: {
            const char sym = n.op == Op::Add ? '+' : n.op == Op::Sub ? '-' : n.op == Op::Mul ? '*' : '/';
            wrap(*n.lhs, prec(n.lhs->op) < prec(n.op));
            out += ' ';
            out += sym;
            out += ' ';
            // left-associative: an equal-precedence right operand needs parentheses
            wrap(*n.rhs, prec(n.rhs->op) <= prec(n.op));
        }
    }
}

bool equal(const Node& a, const Node& b) {
    if (a.op != b.op || a.index != b.index) return false;
    if (a.op == Op::Num && a.value != b.value) return false;
    if (a.lhs && !equal(*a.lhs, *b.lhs)) return false;
    if (a.rhs && !equal(*a.rhs, *b.rhs)) return false;
    return true;
}

int needed(const Node& n) {
    int k = 0;
    if (n.op == Op::Coord) k = n.index + 1;
    if (n.op == Op::Tau || n.op == Op::ConjTau) k = 2;
    if (n.lhs) k = std::max(k, needed(*n.lhs));
    if (n.rhs) k = std::max(k, needed(*n.rhs));
    return k;
}

cplx eval(const Node& n, const Vec& x) {
    switch (n.op) {
        case Op::Num: return n.value;
        case Op::Imag: return {0.0, 1.0};
        case Op::Tau: return {x[0], x[1]};
        case Op::ConjTau: return {x[0], -x[1]};
        case Op::Coord: return x[n.index];
        case Op::Neg: return -eval(*n.lhs, x);
        case Op::Add: return eval(*n.lhs, x) + eval(*n.rhs, x);
        case Op::Sub: return eval(*n.lhs, x) - eval(*n.rhs, x);
        case Op::Mul: return eval(*n.lhs, x) * eval(*n.rhs, x);
        case Op::Div: {
            const cplx d = eval(*n.rhs, x);
            if (std::abs(d) < tol::pole) throw PoleError("division by near-zero value");
            return eval(*n.lhs, x) / d;
        }
        case Op::Pow: {
            const cplx b = eval(*n.lhs, x);
            if (n.index < 0 && std::abs(b) < tol::pole) throw PoleError("negative power of near-zero value");
            cplx r = 1.0;
            const int m = std::abs(n.index);
            for (int k = 0; k < m; ++k) r *= b;
            return n.index < 0 ? 1.0 / r : r;
        }
    }
    return 0.0;
}

// Folding builders used by the differentiator only.
bool is_num(const Expr& e, double v) { return e.node().op == Op::Num && e.node().value == v; }
Expr add(const Expr& a, const Expr& b) {
    if (is_num(a, 0)) return b;
    if (is_num(b, 0)) return a;
    return a + b;
}
Expr sub(const Expr& a, const Expr& b) {
    if (is_num(b, 0)) return a;
    if (is_num(a, 0)) return -b;
    return a - b;
}
Expr mul(const Expr& a, const Expr& b) {
    if (is_num(a, 0) || is_num(b, 0)) return Expr::num(0);
    if (is_num(a, 1)) return b;
    if (is_num(b, 1)) return a;
    return a * b;
}
Expr neg(const Expr& a) { return is_num(a, 0) ? a : -a; }

Expr diff(const Expr& e, int k) {
    const Node& n = e.node();
    switch (n.op) {
        case Op::Num:
        case Op::Imag: return Expr::num(0);
        case Op::Tau: return k == 0 ? Expr::num(1) : k == 1 ? Expr::imag() : Expr::num(0);
        case Op::ConjTau: return k == 0 ? Expr::num(1) : k == 1 ? -Expr::imag() : Expr::num(0);
        case Op::Coord: return Expr::num(n.index == k ? 1 : 0);
        case Op::Neg: return neg(diff(Expr(n.lhs), k));
        case Op::Add: return add(diff(Expr(n.lhs), k), diff(Expr(n.rhs), k));
        case Op::Sub: return sub(diff(Expr(n.lhs), k), diff(Expr(n.rhs), k));
        case Op::Mul: {
            const Expr a(n.lhs), b(n.rhs);
            return add(mul(diff(a, k), b), mul(a, diff(b, k)));
        }
        case Op::Div: {
            const Expr a(n.lhs), b(n.rhs);
            const Expr da = diff(a, k), db = diff(b, k);
            if (is_num(db, 0)) return is_num(da, 0) ? Expr::num(0) : da / b;
            return sub(mul(da, b), mul(a, db)) / pow(b, 2);
        }
        case Op::Pow: {
            const Expr a(n.lhs);
            const int m = n.index;
            if (m == 0) return Expr::num(0);
            const Expr da = diff(a, k);
            if (is_num(da, 0)) return da;
            const Expr inner = m - 1 == 1 ? a : pow(a, m - 1);
            const Expr coef = m - 1 == 0 ? Expr::num(1) : mul(Expr::num(std::abs(m)), inner);
            return m < 0 ? neg(mul(coef, da)) : mul(coef, da);
        }
    }
    return Expr::num(0);
}

}  // namespace

Expr parse_expr(const std::string& text, int line, int column_offset) {
    return Parser(text, line, column_offset).parse();
}

std::string to_string(const Expr& e) {
    std::string out;
    print(e.node(), out);
    return out;
}

bool structurally_equal(const Expr& a, const Expr& b) { return equal(a.node(), b.node()); }

int coords_needed(const Expr& e) { return needed(e.node()); }

cplx evaluate(const Expr& e, const Vec& x) {
    const int k = coords_needed(e);
    if (x.size() < k) throw DimensionError("expression needs " + std::to_string(k) + " coordinates");
    return eval(e.node(), x);
}

Expr derivative(const Expr& e, int k) { return diff(e, k); }

bool is_zero(const Expr& e) { return is_num(e, 0); }

}  // namespace emd
