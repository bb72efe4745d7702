#pragma once

// Shared helpers for the test suites: a generator of random total
// expressions (division and ln/sqrt are wrapped so every sampled point is in
// the domain) and a central finite-difference oracle for derivatives.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qsnm/expr.hpp"
#include "qsnm/fields.hpp"
#include "qsnm/rng.hpp"

namespace qsnm::test {

inline Expr random_expr(SplitMix64& rng, int dim, int depth) {
    if (depth <= 0 || rng.next_below(5) == 0) {
        if (rng.next_below(3) == 0)
            return Expr::constant(rng.next_symmetric() * 2.0);
        return Expr::coordinate(static_cast<int>(rng.next_below(
            static_cast<std::uint64_t>(dim))));
    }
    switch (rng.next_below(10)) {
        case 0:
            return random_expr(rng, dim, depth - 1) +
                   random_expr(rng, dim, depth - 1);
        case 1:
            return random_expr(rng, dim, depth - 1) -
                   random_expr(rng, dim, depth - 1);
        case 2:
            return random_expr(rng, dim, depth - 1) *
                   random_expr(rng, dim, depth - 1);
        case 3:
            return -random_expr(rng, dim, depth - 1);
        case 4:
            return sin(random_expr(rng, dim, depth - 1));
        case 5:
            return cos(random_expr(rng, dim, depth - 1));
        case 6:
            // bounded argument keeps exp towers finite
            return exp(Expr::constant(0.3) * random_expr(rng, dim, depth - 1));
        case 7: {
            Expr den = Expr::constant(2.0) +
                       pow(random_expr(rng, dim, depth - 1), 2);
            return random_expr(rng, dim, depth - 1) / den;
        }
        case 8:
            return ln(Expr::constant(1.5) +
                      pow(random_expr(rng, dim, depth - 1), 2));
        default:
            return sqrt(Expr::constant(1.5) +
                        pow(random_expr(rng, dim, depth - 1), 2));
    }
}

inline Point random_point(SplitMix64& rng, int dim, double half_width = 0.8) {
    Point p(static_cast<std::size_t>(dim));
    for (auto& c : p) c = rng.next_symmetric() * half_width;
    return p;
}

inline double central_difference(const Expr& e, const Point& p, int coord,
                                 double h = 1e-5) {
    Point hi = p;
    Point lo = p;
    hi[static_cast<std::size_t>(coord)] += h;
    lo[static_cast<std::size_t>(coord)] -= h;
    return (evaluate(e, hi) - evaluate(e, lo)) / (2.0 * h);
}

// Dense polynomial of total degree <= degree with coefficients in [-1,1],
// scaled so its sup-norm on [-1,1]^dim is at most 1.
inline Expr random_poly(SplitMix64& rng, int dim, int degree) {
    std::vector<Expr> terms;
    double coeff_mass = 0.0;
    std::vector<int> exponents(static_cast<std::size_t>(dim), 0);
    std::vector<std::pair<std::vector<int>, double>> monomials;

    auto enumerate = [&](auto&& self, int var, int remaining) -> void {
        if (var == dim) {
            double c = rng.next_symmetric();
            coeff_mass += std::abs(c);
            monomials.emplace_back(exponents, c);
            return;
        }
        for (int e = 0; e <= remaining; ++e) {
            exponents[static_cast<std::size_t>(var)] = e;
            self(self, var + 1, remaining - e);
        }
        exponents[static_cast<std::size_t>(var)] = 0;
    };
    enumerate(enumerate, 0, degree);

    double scale = coeff_mass > 1.0 ? 1.0 / coeff_mass : 1.0;
    for (auto& [exps, c] : monomials) {
        Expr term = Expr::constant(c * scale);
        for (int v = 0; v < dim; ++v)
            if (exps[static_cast<std::size_t>(v)] > 0)
                term = term * pow(Expr::coordinate(v),
                                  exps[static_cast<std::size_t>(v)]);
        terms.push_back(term);
    }
    return sum_of(terms);
}

struct TestManifold {
    ChartPtr chart;
    GeneralizedMetric metric;
    StructureField structure;
    GeneratorField gen;
};

// g = I + eps*S, F = eps*K with S symmetric / K skew polynomial matrices,
// pi a polynomial covector; mirrors the library's random-manifold recipe.
inline TestManifold random_manifold_fields(SplitMix64& rng, int dim,
                                           double eps = 0.1, int degree = 2) {
    std::vector<std::string> names;
    for (int i = 0; i < dim; ++i) names.push_back("x" + std::to_string(i + 1));
    ChartPtr chart = Chart::make(names);

    Expr epsc = Expr::constant(eps);
    TensorField G(chart, 0, 2);
    std::vector<std::vector<Expr>> S(static_cast<std::size_t>(dim),
                                     std::vector<Expr>(static_cast<std::size_t>(dim),
                                                       Expr::constant(0.0)));
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            Expr p = random_poly(rng, dim, degree);
            S[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = p;
            S[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = p;
        }
    std::vector<std::vector<Expr>> K(static_cast<std::size_t>(dim),
                                     std::vector<Expr>(static_cast<std::size_t>(dim),
                                                       Expr::constant(0.0)));
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            Expr p = random_poly(rng, dim, degree);
            K[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = p;
            K[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = -p;
        }
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            Expr gij = (i == j ? Expr::constant(1.0) : Expr::constant(0.0)) +
                       epsc * S[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            Expr fij = epsc * K[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            G.component(i, j) = gij + fij;
        }

    GeneralizedMetric m = split_metric(G);
    StructureField structure = compute_A(m);
    TensorField pi(chart, 0, 1);
    for (int i = 0; i < dim; ++i) pi.component(i) = random_poly(rng, dim, degree);
    GeneratorField gen = compute_P(m, pi);
    return TestManifold{chart, std::move(m), std::move(structure),
                        std::move(gen)};
}

// G = [[1,1],[-1,1]], pi = (1,0): constant fields, g = id, A^2 = -id.
inline TestManifold e1_manifold() {
    ChartPtr chart = Chart::make({"x", "y"});
    TensorField G(chart, 0, 2);
    G.component(0, 0) = Expr::constant(1.0);
    G.component(0, 1) = Expr::constant(1.0);
    G.component(1, 0) = Expr::constant(-1.0);
    G.component(1, 1) = Expr::constant(1.0);
    GeneralizedMetric m = split_metric(G);
    StructureField structure = compute_A(m);
    TensorField pi(chart, 0, 1);
    pi.component(0) = Expr::constant(1.0);
    GeneratorField gen = compute_P(m, pi);
    return TestManifold{chart, std::move(m), std::move(structure),
                        std::move(gen)};
}

// Residual between two fields in the blended metric
// max|L-R| / (1 + max(max|L|, max|R|)) over components and points.
struct Residual {
    double max_abs = 0.0;
    double scale = 0.0;
    double rel() const { return max_abs / (1.0 + scale); }
};

inline Residual field_residual(const TensorField& lhs, const TensorField& rhs,
                               const std::vector<Point>& points) {
    Residual r;
    for (const Point& p : points) {
        EvalCache cache;
        auto lv = lhs.eval(p, cache);
        auto rv = rhs.eval(p, cache);
        r.max_abs = std::max(r.max_abs, max_abs_diff(lv, rv));
        r.scale = std::max({r.scale, lv.max_abs(), rv.max_abs()});
    }
    return r;
}

}  // namespace qsnm::test
