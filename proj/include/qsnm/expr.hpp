#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qsnm {

// Scalar expressions over the coordinates of a chart. Nodes are immutable and
// shared; all operations below are pure, so expressions may be evaluated and
// differentiated concurrently.

enum class ExprKind : std::uint8_t {
    Constant,
    Coordinate,
    Negate,
    Add,
    Sub,
    Mul,
    Div,
    Pow,  // integer exponent only
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
};

struct ExprError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : ExprError {
    ParseError(const std::string& what, std::size_t offset)
        : ExprError(what), offset(offset) {}
    std::size_t offset;  // byte offset into the source text
};

struct DomainError : ExprError {
    DomainError(const std::string& what, const void* node)
        : ExprError(what), node(node) {}
    const void* node;  // identity of the offending node
};

class Expr {
  public:
    Expr();  // Constant(0)

    static Expr constant(double value);
    static Expr coordinate(int index);

    // Raw constructors: build exactly the requested node, no rewriting.
    // The parser uses these so that parse trees mirror the source text.
    static Expr unary(ExprKind kind, Expr arg);
    static Expr binary(ExprKind kind, Expr lhs, Expr rhs);
    static Expr pow(Expr base, int exponent);

    ExprKind kind() const;
    double constant_value() const;    // Constant only
    int coordinate_index() const;     // Coordinate only
    int exponent() const;             // Pow only
    Expr lhs() const;                 // binary nodes; also unary arg
    Expr rhs() const;                 // binary nodes only
    Expr arg() const { return lhs(); }

    bool is_constant() const { return kind() == ExprKind::Constant; }
    bool is_constant(double v) const;

    // Stable node identity, used as a cache key.
    const void* id() const;

    struct Node;

  private:
    explicit Expr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
    friend class ExprAccess;
};

// Arithmetic helpers with light construction-time rewrites (constant folding,
// additive/multiplicative identities, exponent 0/1, double negation). These
// keep the trees produced by differentiation and by the tensor builders from
// accumulating trivial noise; they never change the value of an expression
// except for the x*0 -> 0 absorption, which is also part of simplify().
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, int exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr ln(const Expr& a);
Expr sqrt(const Expr& a);

// Balanced sum; keeps tree depth logarithmic when adding many terms.
Expr sum_of(std::span<const Expr> terms);

// Grammar
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' integer)?
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' atom
// where ident is a coordinate name or one of sin, cos, exp, ln, sqrt.
// Throws ParseError with the byte offset of the problem.
Expr parse(std::string_view text, std::span<const std::string> coordinate_names);

// Canonical fully parenthesized form; parse(to_string(parse(t))) is
// structurally identical to parse(t).
std::string to_string(const Expr& e, std::span<const std::string> coordinate_names);

// Per-point evaluation memo. Expressions share subtrees aggressively, so
// reusing one cache for every component evaluated at the same point makes the
// cost proportional to the number of distinct nodes.
class EvalCache {
  public:
    void clear() { memo_.clear(); }
    std::size_t size() const { return memo_.size(); }

  private:
    std::unordered_map<const void*, double> memo_;
    friend double evaluate(const Expr&, std::span<const double>, EvalCache&);
};

double evaluate(const Expr& e, std::span<const double> point);
double evaluate(const Expr& e, std::span<const double> point, EvalCache& cache);

// Exact symbolic partial derivative with respect to coordinate `coord`.
// Results are memoized process-wide so repeated derivatives of shared
// subtrees return the same nodes (which in turn keeps evaluation caches hot).
Expr differentiate(const Expr& e, int coord);

// Value-preserving cleanup pass. Applies exactly: constant folding (with
// 0^0 = 1), x+0, x*0, x*1, x^1, x^0 and double negation, bottom-up.
Expr simplify(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

// Largest coordinate index mentioned, or -1 for coordinate-free expressions.
int max_coordinate_index(const Expr& e);

// Drops the process-wide derivative memo (it pins expression nodes alive);
// long-running drivers call this between unrelated manifolds.
void purge_derivative_cache();

}  // namespace qsnm
