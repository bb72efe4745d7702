#include "qsnm/connection.hpp"

namespace qsnm {

namespace {

const Expr kHalf = Expr::constant(0.5);

void require_chart(const ChartPtr& a, const ChartPtr& b) {
    if (a != b) throw ShapeError("objects live on different charts");
}

}  // namespace

ConnectionCoefficients::ConnectionCoefficients(ChartPtr chart,
                                               ConnectionKind provenance)
    : chart_(std::move(chart)), provenance_(provenance) {
    if (!chart_) throw ShapeError("connection requires a chart");
    auto n = static_cast<std::size_t>(chart_->dimension());
    L_.assign(n * n * n, Expr::constant(0.0));
}

const Expr& ConnectionCoefficients::at(int k, int i, int j) const {
    auto n = static_cast<std::size_t>(dimension());
    return L_[(static_cast<std::size_t>(k) * n + static_cast<std::size_t>(i)) *
                  n +
              static_cast<std::size_t>(j)];
}

Expr& ConnectionCoefficients::at(int k, int i, int j) {
    auto n = static_cast<std::size_t>(dimension());
    return L_[(static_cast<std::size_t>(k) * n + static_cast<std::size_t>(i)) *
                  n +
              static_cast<std::size_t>(j)];
}

TensorField ConnectionCoefficients::as_tensor_field() const {
    return TensorField::from_components(chart_, 1, 2, L_);
}

ConnectionCoefficients christoffel(const GeneralizedMetric& m) {
    int n = m.g.dimension();
    ConnectionCoefficients lc(m.g.chart(), ConnectionKind::levi_civita);
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            // Gamma is symmetric in (i,j); mirrored entries share nodes.
            for (int j = i; j < n; ++j) {
                std::vector<Expr> terms;
                terms.reserve(static_cast<std::size_t>(n));
                for (int l = 0; l < n; ++l) {
                    Expr koszul = differentiate(m.g(j, l), i) +
                                  differentiate(m.g(i, l), j) -
                                  differentiate(m.g(i, j), l);
                    terms.push_back(m.g_inv(k, l) * koszul);
                }
                Expr gamma = kHalf * sum_of(terms);
                lc.at(k, i, j) = gamma;
                lc.at(k, j, i) = gamma;
            }
        }
    }
    return lc;
}

ConnectionCoefficients qs_connection(const ConnectionCoefficients& lc,
                                     const GeneratorField& gen,
                                     const StructureField& structure,
                                     QSFamilyParams params) {
    require_chart(lc.chart(), gen.pi.chart());
    require_chart(lc.chart(), structure.A.chart());
    int n = lc.dimension();
    const TensorField& A = structure.A;
    const TensorField& pi = gen.pi;
    Expr a = Expr::constant(params.a);
    Expr b = Expr::constant(params.b);

    ConnectionCoefficients out(lc.chart(), ConnectionKind::qs_family);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.at(k, i, j) = lc.at(k, i, j) + a * (pi(j) * A(k, i)) +
                                  b * (pi(i) * A(k, j));
    return out;
}

ConnectionCoefficients dual_connection(const ConnectionCoefficients& L) {
    int n = L.dimension();
    ConnectionCoefficients out(L.chart(), ConnectionKind::dual);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out.at(k, i, j) = L.at(k, j, i);
    return out;
}

ConnectionCoefficients symmetric_part_connection(
    const ConnectionCoefficients& L1, const ConnectionCoefficients& L2) {
    require_chart(L1.chart(), L2.chart());
    int n = L1.dimension();
    ConnectionCoefficients out(L1.chart(), ConnectionKind::symmetric_part);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.at(k, i, j) = kHalf * (L1.at(k, i, j) + L2.at(k, i, j));
    return out;
}

TorsionField torsion(const ConnectionCoefficients& L,
                     const GeneralizedMetric& m) {
    require_chart(L.chart(), m.g.chart());
    int n = L.dimension();
    TensorField T12(L.chart(), 1, 2);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                Expr t = L.at(k, i, j) - L.at(k, j, i);
                T12.component(k, i, j) = t;
                T12.component(k, j, i) = -t;
            }

    TensorField T03(L.chart(), 0, 3);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                std::vector<Expr> terms;
                for (int l = 0; l < n; ++l)
                    terms.push_back(T12(l, i, j) * m.g(l, k));
                T03.component(i, j, k) = sum_of(terms);
            }
    return TorsionField{std::move(T12), std::move(T03)};
}

TensorField covariant_derivative(const ConnectionCoefficients& L,
                                 const TensorField& T) {
    require_chart(L.chart(), T.chart());
    int n = T.dimension();
    int r = T.rank_up();
    int s = T.rank_down();
    TensorField out(T.chart(), r, s + 1);

    std::vector<int> src(static_cast<std::size_t>(r + s));
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        auto idx = out.unflatten(flat);  // [uppers..., dir, lowers...]
        int dir = idx[static_cast<std::size_t>(r)];

        // index of T with the direction slot removed
        for (int u = 0; u < r; ++u) src[static_cast<std::size_t>(u)] = idx[static_cast<std::size_t>(u)];
        for (int t = 0; t < s; ++t)
            src[static_cast<std::size_t>(r + t)] = idx[static_cast<std::size_t>(r + 1 + t)];

        std::vector<Expr> terms;
        terms.push_back(differentiate(T.at(src), dir));
        for (int u = 0; u < r; ++u) {
            int saved = src[static_cast<std::size_t>(u)];
            for (int mi = 0; mi < n; ++mi) {
                src[static_cast<std::size_t>(u)] = mi;
                terms.push_back(L.at(saved, dir, mi) * T.at(src));
            }
            src[static_cast<std::size_t>(u)] = saved;
        }
        for (int t = 0; t < s; ++t) {
            int saved = src[static_cast<std::size_t>(r + t)];
            for (int mi = 0; mi < n; ++mi) {
                src[static_cast<std::size_t>(r + t)] = mi;
                terms.push_back(-(L.at(mi, dir, saved) * T.at(src)));
            }
            src[static_cast<std::size_t>(r + t)] = saved;
        }
        out.flat(flat) = sum_of(terms);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Contraction helpers

TensorField one_form_through_map(const TensorField& pi, const TensorField& A) {
    return compose_slot(pi, 0, A);
}

TensorField metric_through_map(const GeneralizedMetric& m,
                               const TensorField& A) {
    int n = m.g.dimension();
    TensorField out(m.g.chart(), 0, 2);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            std::vector<Expr> terms;
            for (int p = 0; p < n; ++p)
                for (int q = 0; q < n; ++q)
                    terms.push_back(A(p, i) * (A(q, j) * m.g(p, q)));
            Expr v = sum_of(terms);  // symmetric since g is
            out.component(i, j) = v;
            out.component(j, i) = v;
        }
    return out;
}

TensorField compose_slot(const TensorField& t, int slot,
                         const TensorField& A) {
    require_chart(t.chart(), A.chart());
    if (slot < t.rank_up() || slot >= t.rank())
        throw ShapeError("compose_slot expects a covariant slot");
    int n = t.dimension();
    TensorField out(t.chart(), t.rank_up(), t.rank_down());
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        auto idx = out.unflatten(flat);
        int i = idx[static_cast<std::size_t>(slot)];
        std::vector<Expr> terms;
        for (int mi = 0; mi < n; ++mi) {
            idx[static_cast<std::size_t>(slot)] = mi;
            terms.push_back(A(mi, i) * t.at(idx));
        }
        out.flat(flat) = sum_of(terms);
    }
    return out;
}

TensorField apply_map(const TensorField& A, const TensorField& t,
                      int upper_slot) {
    require_chart(t.chart(), A.chart());
    if (upper_slot < 0 || upper_slot >= t.rank_up())
        throw ShapeError("apply_map expects a contravariant slot");
    int n = t.dimension();
    TensorField out(t.chart(), t.rank_up(), t.rank_down());
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        auto idx = out.unflatten(flat);
        int l = idx[static_cast<std::size_t>(upper_slot)];
        std::vector<Expr> terms;
        for (int mi = 0; mi < n; ++mi) {
            idx[static_cast<std::size_t>(upper_slot)] = mi;
            terms.push_back(A(l, mi) * t.at(idx));
        }
        out.flat(flat) = sum_of(terms);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Closed-form derivatives of the canonical connection

TensorField nabla1_g_closed(const GeneratorField& gen,
                            const StructureField& structure,
                            const GeneralizedMetric& m) {
    (void)structure;
    int n = m.g.dimension();
    const TensorField& pi = gen.pi;
    const TensorField& F = m.F;
    TensorField out(m.g.chart(), 0, 3);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                out.component(i, j, k) =
                    -(kHalf * (pi(j) * F(i, k) + pi(k) * F(i, j)));
    return out;
}

TensorField nabla1_F_closed(const GeneratorField& gen,
                            const StructureField& structure,
                            const GeneralizedMetric& m,
                            const ConnectionCoefficients& lc) {
    int n = m.g.dimension();
    const TensorField& pi = gen.pi;
    TensorField dgF = covariant_derivative(lc, m.F);
    TensorField gAA = metric_through_map(m, structure.A);
    TensorField out(m.g.chart(), 0, 3);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                out.component(i, j, k) =
                    dgF(i, j, k) +
                    kHalf * (pi(j) * gAA(i, k) - pi(k) * gAA(i, j));
    return out;
}

TensorField nabla1_G_closed(const GeneratorField& gen,
                            const StructureField& structure,
                            const GeneralizedMetric& m,
                            const ConnectionCoefficients& lc) {
    int n = m.g.dimension();
    const TensorField& pi = gen.pi;
    const TensorField& F = m.F;
    TensorField dgF = covariant_derivative(lc, m.F);
    TensorField gAA = metric_through_map(m, structure.A);
    TensorField out(m.g.chart(), 0, 3);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                out.component(i, j, k) =
                    dgF(i, j, k) + kHalf * (pi(j) * (gAA(i, k) - F(i, k)) -
                                            pi(k) * (gAA(i, j) + F(i, j)));
    return out;
}

TensorField nabla1_A_closed(const GeneratorField& gen,
                            const StructureField& structure,
                            const GeneralizedMetric& m,
                            const ConnectionCoefficients& lc) {
    (void)m;
    int n = structure.A.dimension();
    const TensorField& A = structure.A;
    const TensorField& pi = gen.pi;
    TensorField dgA = covariant_derivative(lc, A);  // [l][i][j]
    TensorField piA = one_form_through_map(pi, A);
    TensorField AA = compose(A, A);
    TensorField out(A.chart(), 1, 2);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.component(l, i, j) =
                    dgA(l, i, j) +
                    kHalf * (piA(j) * A(l, i) - pi(j) * AA(l, i));
    return out;
}

TensorField nabla1_pi_closed(const GeneratorField& gen,
                             const StructureField& structure,
                             const GeneralizedMetric& m,
                             const ConnectionCoefficients& lc) {
    (void)m;
    int n = gen.pi.dimension();
    const TensorField& pi = gen.pi;
    TensorField dgpi = covariant_derivative(lc, pi);  // [i][j]
    TensorField piA = one_form_through_map(pi, structure.A);
    TensorField out(pi.chart(), 0, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.component(i, j) = dgpi(i, j) +
                                  kHalf * (pi(i) * piA(j)) -
                                  kHalf * (piA(i) * pi(j));
    return out;
}

DualDerivatives nabla2_relations(const GeneratorField& gen,
                                 const StructureField& structure,
                                 const GeneralizedMetric& m,
                                 const ConnectionCoefficients& lc) {
    int n = m.g.dimension();
    const TensorField& pi = gen.pi;
    const TensorField& F = m.F;
    const TensorField& A = structure.A;
    TensorField dgF = covariant_derivative(lc, F);
    TensorField gAA = metric_through_map(m, A);
    TensorField dgA = covariant_derivative(lc, A);
    TensorField piA = one_form_through_map(pi, A);
    TensorField AA = compose(A, A);

    TensorField g2(m.g.chart(), 0, 3);
    TensorField F2(m.g.chart(), 0, 3);
    TensorField G2(m.g.chart(), 0, 3);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                g2.component(i, j, k) =
                    kHalf * (pi(j) * F(i, k) + pi(k) * F(i, j));
                F2.component(i, j, k) =
                    dgF(i, j, k) -
                    kHalf * (pi(j) * gAA(i, k) - pi(k) * gAA(i, j));
                G2.component(i, j, k) =
                    dgF(i, j, k) - kHalf * (pi(j) * (gAA(i, k) - F(i, k)) -
                                            pi(k) * (gAA(i, j) + F(i, j)));
            }

    TensorField A2(m.g.chart(), 1, 2);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                A2.component(l, i, j) =
                    dgA(l, i, j) -
                    kHalf * (piA(j) * A(l, i) - pi(j) * AA(l, i));
    return DualDerivatives{std::move(g2), std::move(F2), std::move(G2),
                           std::move(A2)};
}

ConnectionCoefficients reconstruct_connection(
    const TorsionField& torsion, const TensorField& nabla_g,
    const GeneralizedMetric& m, const ConnectionCoefficients& lc) {
    require_chart(nabla_g.chart(), m.g.chart());
    if (nabla_g.rank_up() != 0 || nabla_g.rank_down() != 3)
        throw ShapeError("nabla_g must have valence (0,3)");
    int n = m.g.dimension();
    const TensorField& t = torsion.T03;
    const TensorField& ng = nabla_g;

    ConnectionCoefficients out(m.g.chart(), ConnectionKind::reconstructed);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            // lowered coefficients W_{ijk} = g(D_{e_i} e_j, e_k)
            std::vector<Expr> lowered(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) {
                std::vector<Expr> lc_terms;
                for (int mm = 0; mm < n; ++mm)
                    lc_terms.push_back(lc.at(mm, i, j) * m.g(mm, k));
                Expr w = sum_of(lc_terms) +
                         kHalf * ((t(i, j, k) + t(k, i, j)) - t(j, k, i)) -
                         kHalf * ((ng(i, j, k) + ng(j, k, i)) - ng(k, j, i));
                lowered[static_cast<std::size_t>(k)] = w;
            }
            for (int l = 0; l < n; ++l) {
                std::vector<Expr> terms;
                for (int k = 0; k < n; ++k)
                    terms.push_back(lowered[static_cast<std::size_t>(k)] *
                                    m.g_inv(k, l));
                out.at(l, i, j) = sum_of(terms);
            }
        }
    return out;
}

}  // namespace qsnm
