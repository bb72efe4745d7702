#include "qsnm/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <mutex>
#include <sstream>

namespace qsnm {

struct Expr::Node {
    ExprKind kind;
    int aux = 0;         // coordinate index, or pow exponent
    double value = 0.0;  // constant value
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_node(ExprKind kind, int aux, double value, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = kind;
    n->aux = aux;
    n->value = value;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

bool is_unary(ExprKind k) {
    switch (k) {
        case ExprKind::Negate:
        case ExprKind::Sin:
        case ExprKind::Cos:
        case ExprKind::Exp:
        case ExprKind::Ln:
        case ExprKind::Sqrt:
            return true;
        default:
            return false;
    }
}

bool is_binary(ExprKind k) {
    switch (k) {
        case ExprKind::Add:
        case ExprKind::Sub:
        case ExprKind::Mul:
        case ExprKind::Div:
            return true;
        default:
            return false;
    }
}

const char* kind_name(ExprKind k) {
    switch (k) {
        case ExprKind::Constant: return "constant";
        case ExprKind::Coordinate: return "coordinate";
        case ExprKind::Negate: return "negate";
        case ExprKind::Add: return "add";
        case ExprKind::Sub: return "sub";
        case ExprKind::Mul: return "mul";
        case ExprKind::Div: return "div";
        case ExprKind::Pow: return "pow";
        case ExprKind::Sin: return "sin";
        case ExprKind::Cos: return "cos";
        case ExprKind::Exp: return "exp";
        case ExprKind::Ln: return "ln";
        case ExprKind::Sqrt: return "sqrt";
    }
    return "?";
}

}  // namespace

class ExprAccess {
  public:
    static const Expr::Node* node(const Expr& e) { return e.node_.get(); }
    static NodePtr ptr(const Expr& e) { return e.node_; }
    static Expr wrap(NodePtr p) { return Expr(std::move(p)); }
};

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr::Expr() {
    static const NodePtr zero =
        make_node(ExprKind::Constant, 0, 0.0, nullptr, nullptr);
    node_ = zero;
}

Expr Expr::constant(double value) {
    if (value == 0.0) return Expr();  // also normalizes -0.0
    static const NodePtr one =
        make_node(ExprKind::Constant, 0, 1.0, nullptr, nullptr);
    if (value == 1.0) return Expr(one);
    return Expr(make_node(ExprKind::Constant, 0, value, nullptr, nullptr));
}

Expr Expr::coordinate(int index) {
    if (index < 0) throw ExprError("coordinate index must be non-negative");
    return Expr(make_node(ExprKind::Coordinate, index, 0.0, nullptr, nullptr));
}

Expr Expr::unary(ExprKind kind, Expr arg) {
    if (!is_unary(kind)) throw ExprError("not a unary node kind");
    return Expr(make_node(kind, 0, 0.0, ExprAccess::ptr(arg), nullptr));
}

Expr Expr::binary(ExprKind kind, Expr lhs, Expr rhs) {
    if (!is_binary(kind)) throw ExprError("not a binary node kind");
    return Expr(
        make_node(kind, 0, 0.0, ExprAccess::ptr(lhs), ExprAccess::ptr(rhs)));
}

Expr Expr::pow(Expr base, int exponent) {
    return Expr(
        make_node(ExprKind::Pow, exponent, 0.0, ExprAccess::ptr(base), nullptr));
}

ExprKind Expr::kind() const { return node_->kind; }

double Expr::constant_value() const {
    if (kind() != ExprKind::Constant) throw ExprError("not a constant node");
    return node_->value;
}

int Expr::coordinate_index() const {
    if (kind() != ExprKind::Coordinate) throw ExprError("not a coordinate node");
    return node_->aux;
}

int Expr::exponent() const {
    if (kind() != ExprKind::Pow) throw ExprError("not a pow node");
    return node_->aux;
}

Expr Expr::lhs() const {
    if (!node_->a) throw ExprError("node has no operand");
    return Expr(node_->a);
}

Expr Expr::rhs() const {
    if (!node_->b) throw ExprError("node has no second operand");
    return Expr(node_->b);
}

bool Expr::is_constant(double v) const {
    return kind() == ExprKind::Constant && node_->value == v;
}

const void* Expr::id() const { return node_.get(); }

// ---------------------------------------------------------------------------
// Smart constructors

namespace {

double pow_int(double base, int n, const void* node) {
    if (n < 0) {
        if (base == 0.0) throw DomainError("zero raised to a negative power", node);
        return 1.0 / pow_int(base, -n, node);
    }
    double acc = 1.0;  // 0^0 = 1 by convention
    double cur = base;
    for (unsigned e = static_cast<unsigned>(n); e != 0; e >>= 1) {
        if (e & 1u) acc *= cur;
        cur *= cur;
    }
    return acc;
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant())
        return Expr::constant(a.constant_value() + b.constant_value());
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    return Expr::binary(ExprKind::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant())
        return Expr::constant(a.constant_value() - b.constant_value());
    if (b.is_constant(0.0)) return a;
    if (a.is_constant(0.0)) return -b;
    return Expr::binary(ExprKind::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant())
        return Expr::constant(a.constant_value() * b.constant_value());
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    return Expr::binary(ExprKind::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant() && b.constant_value() != 0.0)
        return Expr::constant(a.constant_value() / b.constant_value());
    if (b.is_constant(1.0)) return a;
    return Expr::binary(ExprKind::Div, a, b);
}

Expr operator-(const Expr& a) {
    if (a.is_constant()) return Expr::constant(-a.constant_value());
    if (a.kind() == ExprKind::Negate) return a.arg();
    return Expr::unary(ExprKind::Negate, a);
}

Expr pow(const Expr& base, int exponent) {
    if (exponent == 0) return Expr::constant(1.0);
    if (exponent == 1) return base;
    if (base.is_constant())
        return Expr::constant(pow_int(base.constant_value(), exponent, base.id()));
    return Expr::pow(base, exponent);
}

Expr sin(const Expr& a) {
    if (a.is_constant()) return Expr::constant(std::sin(a.constant_value()));
    return Expr::unary(ExprKind::Sin, a);
}

Expr cos(const Expr& a) {
    if (a.is_constant()) return Expr::constant(std::cos(a.constant_value()));
    return Expr::unary(ExprKind::Cos, a);
}

Expr exp(const Expr& a) {
    if (a.is_constant()) return Expr::constant(std::exp(a.constant_value()));
    return Expr::unary(ExprKind::Exp, a);
}

Expr ln(const Expr& a) {
    if (a.is_constant()) {
        double v = a.constant_value();
        if (v <= 0.0) throw DomainError("ln of non-positive constant", a.id());
        return Expr::constant(std::log(v));
    }
    return Expr::unary(ExprKind::Ln, a);
}

Expr sqrt(const Expr& a) {
    if (a.is_constant()) {
        double v = a.constant_value();
        if (v < 0.0) throw DomainError("sqrt of negative constant", a.id());
        return Expr::constant(std::sqrt(v));
    }
    return Expr::unary(ExprKind::Sqrt, a);
}

Expr sum_of(std::span<const Expr> terms) {
    if (terms.empty()) return Expr::constant(0.0);
    if (terms.size() == 1) return terms[0];
    std::size_t half = terms.size() / 2;
    return sum_of(terms.first(half)) + sum_of(terms.subspan(half));
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double eval_node(const Expr::Node* n, std::span<const double> p,
                 std::unordered_map<const void*, double>& memo) {
    switch (n->kind) {
        case ExprKind::Constant:
            return n->value;
        case ExprKind::Coordinate:
            if (n->aux >= static_cast<int>(p.size()))
                throw DomainError("point dimension too small for coordinate", n);
            return p[static_cast<std::size_t>(n->aux)];
        default:
            break;
    }
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    double va = eval_node(n->a.get(), p, memo);
    double out = 0.0;
    switch (n->kind) {
        case ExprKind::Negate: out = -va; break;
        case ExprKind::Sin: out = std::sin(va); break;
        case ExprKind::Cos: out = std::cos(va); break;
        case ExprKind::Exp: out = std::exp(va); break;
        case ExprKind::Ln:
            if (va <= 0.0) throw DomainError("ln of non-positive value", n);
            out = std::log(va);
            break;
        case ExprKind::Sqrt:
            if (va < 0.0) throw DomainError("sqrt of negative value", n);
            out = std::sqrt(va);
            break;
        case ExprKind::Pow:
            out = pow_int(va, n->aux, n);
            break;
        case ExprKind::Add: out = va + eval_node(n->b.get(), p, memo); break;
        case ExprKind::Sub: out = va - eval_node(n->b.get(), p, memo); break;
        case ExprKind::Mul: out = va * eval_node(n->b.get(), p, memo); break;
        case ExprKind::Div: {
            double vb = eval_node(n->b.get(), p, memo);
            if (vb == 0.0) throw DomainError("division by zero", n);
            out = va / vb;
            break;
        }
        default:
            throw ExprError("corrupt expression node");
    }
    memo.emplace(n, out);
    return out;
}

}  // namespace

double evaluate(const Expr& e, std::span<const double> point, EvalCache& cache) {
    return eval_node(ExprAccess::node(e), point, cache.memo_);
}

double evaluate(const Expr& e, std::span<const double> point) {
    EvalCache cache;
    return evaluate(e, point, cache);
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

struct DiffKey {
    const void* node;
    int coord;
    bool operator==(const DiffKey&) const = default;
};

struct DiffKeyHash {
    std::size_t operator()(const DiffKey& k) const {
        auto h = reinterpret_cast<std::uintptr_t>(k.node);
        h ^= static_cast<std::uintptr_t>(k.coord) * 0x9e3779b97f4a7c15ull;
        return std::hash<std::uintptr_t>()(h);
    }
};

struct DiffCache {
    std::mutex mu;
    // Values keep result nodes alive; pinned sources prevent pointer reuse
    // from aliasing stale keys.
    std::unordered_map<DiffKey, Expr, DiffKeyHash> memo;
    std::vector<NodePtr> pinned;
};

DiffCache& diff_cache() {
    static DiffCache cache;
    return cache;
}

Expr diff_rec(const Expr& e, int coord, DiffCache& cache) {
    const auto* n = ExprAccess::node(e);
    switch (n->kind) {
        case ExprKind::Constant:
            return Expr::constant(0.0);
        case ExprKind::Coordinate:
            return Expr::constant(n->aux == coord ? 1.0 : 0.0);
        default:
            break;
    }
    DiffKey key{n, coord};
    if (auto it = cache.memo.find(key); it != cache.memo.end())
        return it->second;

    Expr a = ExprAccess::wrap(n->a);
    Expr da = diff_rec(a, coord, cache);
    Expr out;
    switch (n->kind) {
        case ExprKind::Negate:
            out = -da;
            break;
        case ExprKind::Add:
            out = da + diff_rec(ExprAccess::wrap(n->b), coord, cache);
            break;
        case ExprKind::Sub:
            out = da - diff_rec(ExprAccess::wrap(n->b), coord, cache);
            break;
        case ExprKind::Mul: {
            Expr b = ExprAccess::wrap(n->b);
            out = da * b + a * diff_rec(b, coord, cache);
            break;
        }
        case ExprKind::Div: {
            Expr b = ExprAccess::wrap(n->b);
            Expr db = diff_rec(b, coord, cache);
            out = (da * b - a * db) / pow(b, 2);
            break;
        }
        case ExprKind::Pow:
            out = Expr::constant(n->aux) * pow(a, n->aux - 1) * da;
            break;
        case ExprKind::Sin:
            out = cos(a) * da;
            break;
        case ExprKind::Cos:
            out = -(sin(a) * da);
            break;
        case ExprKind::Exp:
            out = e * da;
            break;
        case ExprKind::Ln:
            out = da / a;
            break;
        case ExprKind::Sqrt:
            out = da / (Expr::constant(2.0) * e);
            break;
        default:
            throw ExprError("corrupt expression node");
    }
    cache.memo.emplace(key, out);
    cache.pinned.push_back(ExprAccess::ptr(e));
    return out;
}

}  // namespace

Expr differentiate(const Expr& e, int coord) {
    if (coord < 0) throw ExprError("derivative coordinate must be non-negative");
    auto& cache = diff_cache();
    std::lock_guard<std::mutex> lock(cache.mu);
    return diff_rec(e, coord, cache);
}

void purge_derivative_cache() {
    auto& cache = diff_cache();
    std::lock_guard<std::mutex> lock(cache.mu);
    cache.memo.clear();
    cache.pinned.clear();
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

Expr simplify_rec(const Expr& e,
                  std::unordered_map<const void*, Expr>& memo) {
    const auto* n = ExprAccess::node(e);
    if (n->kind == ExprKind::Constant || n->kind == ExprKind::Coordinate)
        return e;
    if (auto it = memo.find(n); it != memo.end()) return it->second;

    Expr a = simplify_rec(ExprAccess::wrap(n->a), memo);
    Expr out = e;
    bool child_changed = a.id() != n->a.get();
    switch (n->kind) {
        case ExprKind::Negate:
            if (a.is_constant())
                out = Expr::constant(-a.constant_value());
            else if (a.kind() == ExprKind::Negate)
                out = a.arg();
            else
                out = child_changed ? Expr::unary(ExprKind::Negate, a) : e;
            break;
        case ExprKind::Sin:
        case ExprKind::Cos:
        case ExprKind::Exp:
        case ExprKind::Ln:
        case ExprKind::Sqrt:
            if (a.is_constant()) {
                double v = a.constant_value();
                switch (n->kind) {
                    case ExprKind::Sin: out = Expr::constant(std::sin(v)); break;
                    case ExprKind::Cos: out = Expr::constant(std::cos(v)); break;
                    case ExprKind::Exp: out = Expr::constant(std::exp(v)); break;
                    case ExprKind::Ln:
                        // Folding a domain error would hide it; leave in place.
                        if (v > 0.0) out = Expr::constant(std::log(v));
                        else out = child_changed ? Expr::unary(n->kind, a) : e;
                        break;
                    case ExprKind::Sqrt:
                        if (v >= 0.0) out = Expr::constant(std::sqrt(v));
                        else out = child_changed ? Expr::unary(n->kind, a) : e;
                        break;
                    default: break;
                }
            } else {
                out = child_changed ? Expr::unary(n->kind, a) : e;
            }
            break;
        case ExprKind::Pow:
            if (n->aux == 0)
                out = Expr::constant(1.0);
            else if (n->aux == 1)
                out = a;
            else if (a.is_constant())
                out = Expr::constant(pow_int(a.constant_value(), n->aux, n));
            else
                out = child_changed ? Expr::pow(a, n->aux) : e;
            break;
        case ExprKind::Add:
        case ExprKind::Sub:
        case ExprKind::Mul:
        case ExprKind::Div: {
            Expr b = simplify_rec(ExprAccess::wrap(n->b), memo);
            child_changed = child_changed || b.id() != n->b.get();
            if (a.is_constant() && b.is_constant() &&
                !(n->kind == ExprKind::Div && b.constant_value() == 0.0)) {
                double va = a.constant_value();
                double vb = b.constant_value();
                switch (n->kind) {
                    case ExprKind::Add: out = Expr::constant(va + vb); break;
                    case ExprKind::Sub: out = Expr::constant(va - vb); break;
                    case ExprKind::Mul: out = Expr::constant(va * vb); break;
                    case ExprKind::Div: out = Expr::constant(va / vb); break;
                    default: break;
                }
            } else if (n->kind == ExprKind::Add && a.is_constant(0.0)) {
                out = b;
            } else if (n->kind == ExprKind::Add && b.is_constant(0.0)) {
                out = a;
            } else if (n->kind == ExprKind::Mul &&
                       (a.is_constant(0.0) || b.is_constant(0.0))) {
                out = Expr::constant(0.0);
            } else if (n->kind == ExprKind::Mul && a.is_constant(1.0)) {
                out = b;
            } else if (n->kind == ExprKind::Mul && b.is_constant(1.0)) {
                out = a;
            } else {
                out = child_changed ? Expr::binary(n->kind, a, b) : e;
            }
            break;
        }
        default:
            break;
    }
    memo.emplace(n, out);
    return out;
}

}  // namespace

Expr simplify(const Expr& e) {
    std::unordered_map<const void*, Expr> memo;
    return simplify_rec(e, memo);
}

// ---------------------------------------------------------------------------
// Structural comparison and inspection

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.id() == b.id()) return true;
    if (a.kind() != b.kind()) return false;
    const auto* na = ExprAccess::node(a);
    const auto* nb = ExprAccess::node(b);
    switch (a.kind()) {
        case ExprKind::Constant:
            return na->value == nb->value;
        case ExprKind::Coordinate:
            return na->aux == nb->aux;
        case ExprKind::Pow:
            return na->aux == nb->aux &&
                   structurally_equal(ExprAccess::wrap(na->a),
                                      ExprAccess::wrap(nb->a));
        default:
            if (!structurally_equal(ExprAccess::wrap(na->a),
                                    ExprAccess::wrap(nb->a)))
                return false;
            if (static_cast<bool>(na->b) != static_cast<bool>(nb->b))
                return false;
            return !na->b || structurally_equal(ExprAccess::wrap(na->b),
                                                ExprAccess::wrap(nb->b));
    }
}

namespace {

// DAG-aware: shared subtrees are visited once, which matters because derived
// fields share nodes very aggressively.
int max_coord_rec(const Expr::Node* n,
                  std::unordered_map<const void*, int>& memo) {
    switch (n->kind) {
        case ExprKind::Constant:
            return -1;
        case ExprKind::Coordinate:
            return n->aux;
        default: {
            if (auto it = memo.find(n); it != memo.end()) return it->second;
            int m = max_coord_rec(n->a.get(), memo);
            if (n->b) m = std::max(m, max_coord_rec(n->b.get(), memo));
            memo.emplace(n, m);
            return m;
        }
    }
}

}  // namespace

int max_coordinate_index(const Expr& e) {
    std::unordered_map<const void*, int> memo;
    return max_coord_rec(ExprAccess::node(e), memo);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

void print_rec(const Expr& e, std::span<const std::string> names,
               std::string& out) {
    const auto* n = ExprAccess::node(e);
    switch (n->kind) {
        case ExprKind::Constant: {
            double v = n->value;
            if (std::signbit(v) && v != 0.0) {
                out += "(-";
                out += format_double(-v);
                out += ')';
            } else {
                out += format_double(v);
            }
            return;
        }
        case ExprKind::Coordinate: {
            auto idx = static_cast<std::size_t>(n->aux);
            if (idx >= names.size())
                throw ExprError("coordinate index out of range for printer");
            out += names[idx];
            return;
        }
        case ExprKind::Negate:
            out += "(-";
            print_rec(ExprAccess::wrap(n->a), names, out);
            out += ')';
            return;
        case ExprKind::Pow:
            out += '(';
            print_rec(ExprAccess::wrap(n->a), names, out);
            out += '^';
            out += std::to_string(n->aux);
            out += ')';
            return;
        case ExprKind::Sin:
        case ExprKind::Cos:
        case ExprKind::Exp:
        case ExprKind::Ln:
        case ExprKind::Sqrt:
            out += kind_name(n->kind);
            out += '(';
            print_rec(ExprAccess::wrap(n->a), names, out);
            out += ')';
            return;
        case ExprKind::Add:
        case ExprKind::Sub:
        case ExprKind::Mul:
        case ExprKind::Div: {
            const char* op = n->kind == ExprKind::Add   ? " + "
                             : n->kind == ExprKind::Sub ? " - "
                             : n->kind == ExprKind::Mul ? " * "
                                                        : " / ";
            out += '(';
            print_rec(ExprAccess::wrap(n->a), names, out);
            out += op;
            print_rec(ExprAccess::wrap(n->b), names, out);
            out += ')';
            return;
        }
    }
}

}  // namespace

std::string to_string(const Expr& e, std::span<const std::string> names) {
    std::string out;
    print_rec(e, names, out);
    return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

class Parser {
  public:
    Parser(std::string_view text, std::span<const std::string> names)
        : text_(text), names_(names) {}

    Expr run() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            fail("unexpected trailing input", pos_);
        return e;
    }

  private:
    std::string_view text_;
    std::span<const std::string> names_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg, std::size_t at) {
        std::ostringstream os;
        os << "syntax error at offset " << at << ": " << msg;
        throw ParseError(os.str(), at);
    }

    void skip_ws() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool accept(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c, const char* what) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c)
            fail(std::string("expected ") + what, pos_);
        ++pos_;
    }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            skip_ws();
            if (accept('+'))
                e = Expr::binary(ExprKind::Add, e, parse_term());
            else if (accept('-'))
                e = Expr::binary(ExprKind::Sub, e, parse_term());
            else
                return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        for (;;) {
            skip_ws();
            if (accept('*'))
                e = Expr::binary(ExprKind::Mul, e, parse_factor());
            else if (accept('/'))
                e = Expr::binary(ExprKind::Div, e, parse_factor());
            else
                return e;
        }
    }

    Expr parse_factor() {
        Expr base = parse_atom();
        skip_ws();
        if (accept('^')) return Expr::pow(base, parse_integer());
        return base;
    }

    int parse_integer() {
        skip_ws();
        std::size_t start = pos_;
        bool negative = false;
        if (pos_ < text_.size() && text_[pos_] == '-') {
            negative = true;
            ++pos_;
        }
        if (pos_ >= text_.size() || !is_digit(text_[pos_]))
            fail("expected integer exponent", pos_);
        long v = 0;
        while (pos_ < text_.size() && is_digit(text_[pos_])) {
            v = v * 10 + (text_[pos_] - '0');
            if (v > 1000000) fail("exponent too large", start);
            ++pos_;
        }
        if (pos_ < text_.size() && text_[pos_] == '.')
            fail("exponent must be an integer", pos_);
        return static_cast<int>(negative ? -v : v);
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '-') {
            ++pos_;
            return Expr::unary(ExprKind::Negate, parse_atom());
        }
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            expect(')', "')'");
            return e;
        }
        if (is_digit(c)) return parse_number();
        if (is_ident_start(c)) return parse_ident();
        fail(std::string("unexpected '") + c + "'", pos_);
    }

    Expr parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            if (pos_ >= text_.size() || !is_digit(text_[pos_]))
                fail("expected digits after decimal point", pos_);
            while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
                ++pos_;
            if (pos_ >= text_.size() || !is_digit(text_[pos_])) {
                pos_ = mark;  // "2e" is "2" followed by identifier 'e'
            } else {
                while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
            }
        }
        double v = 0.0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (res.ec != std::errc())
            fail("malformed number literal", start);
        return Expr::constant(v);
    }

    Expr parse_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
        std::string_view name = text_.substr(start, pos_ - start);

        static const std::string_view functions[] = {"sin", "cos", "exp", "ln",
                                                     "sqrt"};
        for (auto f : functions) {
            if (name == f) {
                skip_ws();
                if (pos_ >= text_.size() || text_[pos_] != '(')
                    fail("expected '(' after function name", pos_);
                ++pos_;
                Expr arg = parse_expr();
                expect(')', "')' to close function call");
                ExprKind k = f == "sin"   ? ExprKind::Sin
                             : f == "cos" ? ExprKind::Cos
                             : f == "exp" ? ExprKind::Exp
                             : f == "ln"  ? ExprKind::Ln
                                          : ExprKind::Sqrt;
                return Expr::unary(k, arg);
            }
        }
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (name == names_[i]) {
                if (peek() == '(')
                    fail("'" + std::string(name) + "' is not a function", pos_);
                return Expr::coordinate(static_cast<int>(i));
            }
        }
        fail("unknown identifier '" + std::string(name) + "'", start);
    }
};

}  // namespace

Expr parse(std::string_view text, std::span<const std::string> coordinate_names) {
    for (std::size_t i = 0; i < coordinate_names.size(); ++i) {
        const std::string& n = coordinate_names[i];
        if (n.empty() || !is_ident_start(n[0]) ||
            !std::all_of(n.begin(), n.end(), is_ident_char))
            throw ExprError("invalid coordinate name '" + n + "'");
        for (auto f : {"sin", "cos", "exp", "ln", "sqrt"})
            if (n == f)
                throw ExprError("coordinate name '" + n + "' shadows a function");
        for (std::size_t j = i + 1; j < coordinate_names.size(); ++j)
            if (n == coordinate_names[j])
                throw ExprError("duplicate coordinate name '" + n + "'");
    }
    return Parser(text, coordinate_names).run();
}

}  // namespace qsnm
