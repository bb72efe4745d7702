#include "qsnm/fields.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "qsnm/rng.hpp"

namespace qsnm {

namespace {

constexpr std::uint64_t kStandardSampleSeed = 0x51ab5a3d0005eedull;

std::size_t pow_size(int n, int rank) {
    std::size_t s = 1;
    for (int i = 0; i < rank; ++i) s *= static_cast<std::size_t>(n);
    return s;
}

std::string point_to_string(std::span<const double> p) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) os << ", ";
        os << p[i];
    }
    os << ')';
    return os.str();
}

std::string index_to_string(std::span<const int> idx) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) os << ',';
        os << idx[i] + 1;
    }
    os << ']';
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Chart

std::shared_ptr<const Chart> Chart::make(
    std::vector<std::string> coordinate_names,
    std::vector<std::array<double, 2>> sample_domain) {
    auto n = coordinate_names.size();
    if (n < 2) throw ShapeError("chart dimension must be at least 2");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (coordinate_names[i] == coordinate_names[j])
                throw ShapeError("coordinate names must be distinct");
    if (sample_domain.empty())
        sample_domain.assign(n, {-1.0, 1.0});
    if (sample_domain.size() != n)
        throw ShapeError("sample domain size must match dimension");
    for (const auto& [lo, hi] : sample_domain)
        if (!(lo < hi)) throw ShapeError("sample box must have positive volume");
    auto chart = std::make_shared<Chart>();
    chart->names_ = std::move(coordinate_names);
    chart->box_ = std::move(sample_domain);
    return chart;
}

std::vector<Point> sample_points(const Chart& chart, int count,
                                 std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<Point> points;
    points.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        Point p(static_cast<std::size_t>(chart.dimension()));
        for (int i = 0; i < chart.dimension(); ++i) {
            auto [lo, hi] = chart.sample_domain()[static_cast<std::size_t>(i)];
            double margin = 0.1 * (hi - lo);
            p[static_cast<std::size_t>(i)] =
                lo + margin + rng.next_unit() * (hi - lo - 2.0 * margin);
        }
        points.push_back(std::move(p));
    }
    return points;
}

std::vector<Point> standard_sample_points(const Chart& chart, int count) {
    return sample_points(chart, count, kStandardSampleSeed);
}

// ---------------------------------------------------------------------------
// NumericTensor

double NumericTensor::at(std::span<const int> idx) const {
    std::size_t flat = 0;
    for (int i : idx) flat = flat * static_cast<std::size_t>(dimension) +
                             static_cast<std::size_t>(i);
    return values[flat];
}

double NumericTensor::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const NumericTensor& a, const NumericTensor& b) {
    if (a.values.size() != b.values.size())
        throw ShapeError("numeric tensor shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

// ---------------------------------------------------------------------------
// TensorField

TensorField::TensorField(ChartPtr chart, int rank_up, int rank_down)
    : chart_(std::move(chart)), rank_up_(rank_up), rank_down_(rank_down) {
    if (!chart_) throw ShapeError("tensor field requires a chart");
    if (rank_up < 0 || rank_down < 0) throw ShapeError("negative tensor rank");
    comps_.assign(pow_size(chart_->dimension(), rank()), Expr::constant(0.0));
}

TensorField TensorField::from_components(ChartPtr chart, int rank_up,
                                         int rank_down,
                                         std::vector<Expr> components) {
    TensorField t(std::move(chart), rank_up, rank_down);
    if (components.size() != t.comps_.size())
        throw ShapeError("component count does not match valence");
    for (const Expr& e : components)
        if (max_coordinate_index(e) >= t.dimension())
            throw ShapeError("expression references coordinate beyond chart");
    t.comps_ = std::move(components);
    return t;
}

std::size_t TensorField::flatten(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != rank())
        throw ShapeError("index arity does not match tensor rank");
    std::size_t flat = 0;
    for (int i : idx) {
        if (i < 0 || i >= dimension()) throw ShapeError("index out of range");
        flat = flat * static_cast<std::size_t>(dimension()) +
               static_cast<std::size_t>(i);
    }
    return flat;
}

std::vector<int> TensorField::unflatten(std::size_t flat) const {
    std::vector<int> idx(static_cast<std::size_t>(rank()));
    for (int k = rank() - 1; k >= 0; --k) {
        idx[static_cast<std::size_t>(k)] =
            static_cast<int>(flat % static_cast<std::size_t>(dimension()));
        flat /= static_cast<std::size_t>(dimension());
    }
    return idx;
}

const Expr& TensorField::at(std::span<const int> idx) const {
    return comps_[flatten(idx)];
}

Expr& TensorField::at(std::span<const int> idx) { return comps_[flatten(idx)]; }

NumericTensor TensorField::eval(std::span<const double> point) const {
    EvalCache cache;
    return eval(point, cache);
}

NumericTensor TensorField::eval(std::span<const double> point,
                                EvalCache& cache) const {
    if (static_cast<int>(point.size()) != dimension())
        throw ShapeError("point dimension does not match chart");
    NumericTensor out;
    out.dimension = dimension();
    out.rank_up = rank_up_;
    out.rank_down = rank_down_;
    out.values.resize(comps_.size());
    for (std::size_t i = 0; i < comps_.size(); ++i) {
        try {
            out.values[i] = evaluate(comps_[i], point, cache);
        } catch (const DomainError& err) {
            auto idx = unflatten(i);
            throw DomainError(std::string(err.what()) + " in component " +
                                  index_to_string(idx) + " at point " +
                                  point_to_string(point),
                              err.node);
        }
    }
    return out;
}

namespace {

void require_same_shape(const TensorField& a, const TensorField& b) {
    if (a.chart() != b.chart())
        throw ShapeError("tensor fields live on different charts");
    if (a.rank_up() != b.rank_up() || a.rank_down() != b.rank_down())
        throw ShapeError("tensor field valence mismatch");
}

}  // namespace

TensorField operator+(const TensorField& a, const TensorField& b) {
    require_same_shape(a, b);
    TensorField out(a.chart(), a.rank_up(), a.rank_down());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.flat(i) = a.flat(i) + b.flat(i);
    return out;
}

TensorField operator-(const TensorField& a, const TensorField& b) {
    require_same_shape(a, b);
    TensorField out(a.chart(), a.rank_up(), a.rank_down());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.flat(i) = a.flat(i) - b.flat(i);
    return out;
}

TensorField operator*(double c, const TensorField& a) {
    TensorField out(a.chart(), a.rank_up(), a.rank_down());
    Expr cc = Expr::constant(c);
    for (std::size_t i = 0; i < a.size(); ++i) out.flat(i) = cc * a.flat(i);
    return out;
}

TensorField permute_slots(const TensorField& t, std::span<const int> perm) {
    if (static_cast<int>(perm.size()) != t.rank())
        throw ShapeError("permutation arity does not match tensor rank");
    TensorField out(t.chart(), t.rank_up(), t.rank_down());
    std::vector<int> src(perm.size());
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        auto idx = t.unflatten(flat);
        for (std::size_t s = 0; s < perm.size(); ++s)
            src[s] = idx[static_cast<std::size_t>(perm[s])];
        out.flat(flat) = t.at(src);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Determinant and adjugate by minor expansion with shared subdeterminants

namespace {

// det of the submatrix (rows, cols) where cols is a bitmask; minor expansion
// with memoized column subsets so common subdeterminants become shared nodes.
Expr det_sub(std::span<const Expr> m, int n, const std::vector<int>& rows,
             std::uint32_t colmask) {
    int k = static_cast<int>(rows.size());
    if (std::popcount(colmask) != k)
        throw ShapeError("minor shape mismatch");
    struct Solver {
        std::span<const Expr> m;
        int n;
        const std::vector<int>& rows;
        int k;
        std::unordered_map<std::uint32_t, Expr> memo;

        Expr solve(std::uint32_t mask) {
            if (mask == 0) return Expr::constant(1.0);
            if (auto it = memo.find(mask); it != memo.end()) return it->second;
            int used = std::popcount(mask);
            int row = rows[static_cast<std::size_t>(k - used)];
            std::vector<Expr> terms;
            int sign = 1;
            for (int j = 0; j < n; ++j) {
                if (!(mask & (1u << j))) continue;
                Expr sub = solve(mask & ~(1u << j));
                Expr entry = m[static_cast<std::size_t>(row * n + j)];
                Expr term = entry * sub;
                terms.push_back(sign > 0 ? term : -term);
                sign = -sign;
            }
            Expr result = sum_of(terms);
            memo.emplace(mask, result);
            return result;
        }
    } solver{m, n, rows, k, {}};
    return solver.solve(colmask);
}

}  // namespace

Expr symbolic_det(std::span<const Expr> m, int n) {
    if (m.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw ShapeError("matrix size mismatch");
    if (n > 12) throw ShapeError("symbolic determinant limited to n <= 12");
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    return det_sub(m, n, rows, (n == 32 ? ~0u : (1u << n) - 1));
}

std::vector<Expr> symbolic_adjugate(std::span<const Expr> m, int n) {
    if (m.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw ShapeError("matrix size mismatch");
    std::vector<Expr> adj(static_cast<std::size_t>(n) *
                              static_cast<std::size_t>(n),
                          Expr::constant(0.0));
    for (int k = 0; k < n; ++k) {      // row removed
        std::vector<int> rows;
        for (int i = 0; i < n; ++i)
            if (i != k) rows.push_back(i);
        for (int j = 0; j < n; ++j) {  // column removed
            std::uint32_t colmask = ((1u << n) - 1) & ~(1u << j);
            Expr minor = det_sub(m, n, rows, colmask);
            Expr cof = ((k + j) % 2 == 0) ? minor : -minor;
            // adj[j][k] = cofactor_{kj}
            adj[static_cast<std::size_t>(j * n + k)] = cof;
        }
    }
    return adj;
}

// ---------------------------------------------------------------------------
// Metric split and derived fields

GeneralizedMetric split_metric(const TensorField& G, double eps) {
    if (G.rank_up() != 0 || G.rank_down() != 2)
        throw ShapeError("generalized metric must have valence (0,2)");
    const ChartPtr& chart = G.chart();
    int n = G.dimension();
    Expr half = Expr::constant(0.5);

    TensorField g(chart, 0, 2);
    TensorField F(chart, 0, 2);
    // Mirrored components share nodes (g_ji is g_ij, F_ji is -F_ij), which
    // makes the symmetry invariants bit-exact under evaluation.
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            Expr sym = half * (G(i, j) + G(j, i));
            g.component(i, j) = sym;
            g.component(j, i) = sym;
            if (i != j) {
                Expr skew = half * (G(i, j) - G(j, i));
                F.component(i, j) = skew;
                F.component(j, i) = -skew;
            }
        }
    }

    std::vector<Expr> g_entries;
    g_entries.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g_entries.push_back(g(i, j));
    Expr det = symbolic_det(g_entries, n);
    std::vector<Expr> adj = symbolic_adjugate(g_entries, n);

    TensorField g_inv(chart, 2, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g_inv.component(i, j) =
                adj[static_cast<std::size_t>(i * n + j)] / det;

    // Reject metrics that degenerate anywhere on the standard sample set.
    for (const Point& p : standard_sample_points(*chart)) {
        double d = evaluate(det, p);
        if (std::abs(d) <= eps)
            throw DegeneracyError(
                "symmetric part of metric is degenerate (|det g| = " +
                    std::to_string(std::abs(d)) + ") at point " +
                    point_to_string(p),
                p);
    }

    return GeneralizedMetric{G, std::move(g), std::move(F), std::move(g_inv),
                             std::move(det)};
}

std::vector<double> metric_inverse_at(const TensorField& g,
                                      std::span<const double> point,
                                      double eps) {
    if (g.rank_up() != 0 || g.rank_down() != 2)
        throw ShapeError("metric must have valence (0,2)");
    int n = g.dimension();
    NumericTensor gv = g.eval(point);

    // Gauss-Jordan with partial pivoting on [g | I].
    std::vector<double> a(gv.values);
    std::vector<double> inv(static_cast<std::size_t>(n) *
                                static_cast<std::size_t>(n),
                            0.0);
    for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i * n + i)] = 1.0;
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[static_cast<std::size_t>(r * n + col)]) >
                std::abs(a[static_cast<std::size_t>(pivot * n + col)]))
                pivot = r;
        if (pivot != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(a[static_cast<std::size_t>(col * n + j)],
                          a[static_cast<std::size_t>(pivot * n + j)]);
                std::swap(inv[static_cast<std::size_t>(col * n + j)],
                          inv[static_cast<std::size_t>(pivot * n + j)]);
            }
            det = -det;
        }
        double p = a[static_cast<std::size_t>(col * n + col)];
        det *= p;
        if (std::abs(p) < 1e-300)
            throw DegeneracyError("metric is numerically singular at point " +
                                      point_to_string(point),
                                  Point(point.begin(), point.end()));
        for (int j = 0; j < n; ++j) {
            a[static_cast<std::size_t>(col * n + j)] /= p;
            inv[static_cast<std::size_t>(col * n + j)] /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[static_cast<std::size_t>(r * n + col)];
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a[static_cast<std::size_t>(r * n + j)] -=
                    f * a[static_cast<std::size_t>(col * n + j)];
                inv[static_cast<std::size_t>(r * n + j)] -=
                    f * inv[static_cast<std::size_t>(col * n + j)];
            }
        }
    }
    if (std::abs(det) <= eps)
        throw DegeneracyError("metric is degenerate (|det g| = " +
                                  std::to_string(std::abs(det)) +
                                  ") at point " + point_to_string(point),
                              Point(point.begin(), point.end()));
    return inv;
}

StructureField compute_A(const GeneralizedMetric& m) {
    int n = m.g.dimension();
    TensorField A(m.g.chart(), 1, 1);
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            std::vector<Expr> terms;
            terms.reserve(static_cast<std::size_t>(n));
            // A^k_i = F_{ij} g^{jk}
            for (int j = 0; j < n; ++j)
                terms.push_back(m.F(i, j) * m.g_inv(j, k));
            A.component(k, i) = sum_of(terms);
        }
    }
    return StructureField{std::move(A)};
}

GeneratorField compute_P(const GeneralizedMetric& m, const TensorField& pi) {
    if (pi.rank_up() != 0 || pi.rank_down() != 1)
        throw ShapeError("generator 1-form must have valence (0,1)");
    if (pi.chart() != m.g.chart())
        throw ShapeError("generator lives on a different chart");
    int n = m.g.dimension();
    TensorField P(m.g.chart(), 1, 0);
    for (int i = 0; i < n; ++i) {
        std::vector<Expr> terms;
        for (int j = 0; j < n; ++j) terms.push_back(m.g_inv(i, j) * pi(j));
        P.component(i) = sum_of(terms);
    }
    return GeneratorField{pi, std::move(P)};
}

TensorField compose(const TensorField& a, const TensorField& b) {
    if (a.rank_up() != 1 || a.rank_down() != 1 || b.rank_up() != 1 ||
        b.rank_down() != 1)
        throw ShapeError("compose expects (1,1) fields");
    if (a.chart() != b.chart())
        throw ShapeError("compose on mismatched charts");
    int n = a.dimension();
    TensorField out(a.chart(), 1, 1);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            std::vector<Expr> terms;
            for (int mID = 0; mID < n; ++mID)
                terms.push_back(a(k, mID) * b(mID, i));
            out.component(k, i) = sum_of(terms);
        }
    return out;
}

}  // namespace qsnm
