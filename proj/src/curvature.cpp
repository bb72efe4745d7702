#include "qsnm/curvature.hpp"

namespace qsnm {

namespace {

const Expr kHalf = Expr::constant(0.5);
const Expr kQuarter = Expr::constant(0.25);

}  // namespace

CurvatureField curvature_standard(const ConnectionCoefficients& L,
                                  CurvatureTag tag) {
    int n = L.dimension();
    TensorField R(L.chart(), 1, 3);
    // antisymmetric in (i,j) by construction; mirrored entries share nodes
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    std::vector<Expr> terms;
                    terms.push_back(differentiate(L.at(l, j, k), i));
                    terms.push_back(-differentiate(L.at(l, i, k), j));
                    for (int m = 0; m < n; ++m) {
                        terms.push_back(L.at(l, i, m) * L.at(m, j, k));
                        terms.push_back(-(L.at(l, j, m) * L.at(m, i, k)));
                    }
                    Expr r = sum_of(terms);
                    R.component(l, i, j, k) = r;
                    R.component(l, j, i, k) = -r;
                }
    return CurvatureField{std::move(R), tag};
}

CurvatureField curvature_mixed(const ConnectionCoefficients& L1,
                               const ConnectionCoefficients& L2, int kind) {
    if (L1.chart() != L2.chart())
        throw ShapeError("mixed curvature on mismatched charts");
    if (kind < 3 || kind > 5)
        throw ShapeError("mixed curvature kind must be 3, 4 or 5");
    int n = L1.dimension();
    TensorField R(L1.chart(), 1, 3);

    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    std::vector<Expr> terms;
                    if (kind == 5) {
                        terms.push_back(differentiate(L1.at(l, j, k), i));
                        terms.push_back(differentiate(L2.at(l, j, k), i));
                        terms.push_back(-differentiate(L1.at(l, i, k), j));
                        terms.push_back(-differentiate(L2.at(l, i, k), j));
                        for (int m = 0; m < n; ++m) {
                            terms.push_back(L1.at(l, i, m) * L1.at(m, j, k));
                            terms.push_back(-(L2.at(l, j, m) * L1.at(m, i, k)));
                            terms.push_back(L2.at(l, i, m) * L2.at(m, j, k));
                            terms.push_back(-(L1.at(l, j, m) * L2.at(m, i, k)));
                        }
                        R.component(l, i, j, k) = kHalf * sum_of(terms);
                        continue;
                    }
                    // common part of kinds 3 and 4:
                    // D2_X D1_Y Z - D1_Y D2_X Z
                    terms.push_back(differentiate(L1.at(l, j, k), i));
                    terms.push_back(-differentiate(L2.at(l, i, k), j));
                    for (int m = 0; m < n; ++m) {
                        terms.push_back(L2.at(l, i, m) * L1.at(m, j, k));
                        terms.push_back(-(L1.at(l, j, m) * L2.at(m, i, k)));
                        if (kind == 3) {
                            // + D2_{D1_Y X} Z - D1_{D2_X Y} Z
                            terms.push_back(L1.at(m, j, i) * L2.at(l, m, k));
                            terms.push_back(-(L2.at(m, i, j) * L1.at(l, m, k)));
                        } else {
                            // + D2_{D2_Y X} Z - D1_{D1_X Y} Z
                            terms.push_back(L2.at(m, j, i) * L2.at(l, m, k));
                            terms.push_back(-(L1.at(m, i, j) * L1.at(l, m, k)));
                        }
                    }
                    R.component(l, i, j, k) = sum_of(terms);
                }
    return CurvatureField{std::move(R),
                          kind == 3   ? CurvatureTag::r3
                          : kind == 4 ? CurvatureTag::r4
                                      : CurvatureTag::r5};
}

AuxTensorSet aux_tensors(const GeneratorField& gen,
                         const StructureField& structure,
                         const GeneralizedMetric& m,
                         const ConnectionCoefficients& lc) {
    int n = m.g.dimension();
    const TensorField& pi = gen.pi;
    const TensorField& A = structure.A;
    TensorField dpi = covariant_derivative(lc, pi);  // (0,2) [i][j]
    TensorField dA = covariant_derivative(lc, A);    // (1,2) [l][i][j]
    TensorField piA = one_form_through_map(pi, A);
    TensorField AA = compose(A, A);

    TensorField alpha1(m.g.chart(), 0, 2);
    TensorField alpha2(m.g.chart(), 0, 2);
    TensorField beta1(m.g.chart(), 0, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Expr twist = kHalf * (pi(i) * piA(j)) - kHalf * (piA(i) * pi(j));
            alpha1.component(i, j) = dpi(i, j) + twist;
            alpha2.component(i, j) = dpi(i, j) - twist;
        }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Expr b = dpi(i, j) - dpi(j, i);
            beta1.component(i, j) = b;
            beta1.component(j, i) = -b;
        }

    TensorField gamma1(m.g.chart(), 1, 2);
    TensorField gamma2(m.g.chart(), 1, 2);
    TensorField delta1(m.g.chart(), 1, 2);
    for (int l = 0; l < n; ++l) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Expr shift = kHalf * (pi(j) * AA(l, i));
                gamma1.component(l, i, j) = dA(l, i, j) - shift;
                gamma2.component(l, i, j) = dA(l, i, j) + shift;
            }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                Expr d = dA(l, i, j) - dA(l, j, i);
                delta1.component(l, i, j) = d;
                delta1.component(l, j, i) = -d;
            }
    }
    return AuxTensorSet{std::move(alpha1), std::move(alpha2), std::move(beta1),
                        std::move(gamma1), std::move(gamma2),
                        std::move(delta1)};
}

CurvatureField curvature_closed_form(const GeneratorField& gen,
                                     const StructureField& structure,
                                     const GeneralizedMetric& m,
                                     const ConnectionCoefficients& lc,
                                     const CurvatureField& rg, int theta) {
    if (theta < 1 || theta > 5)
        throw ShapeError("closed-form curvature requires theta in 1..5");
    int n = m.g.dimension();
    const TensorField& pi = gen.pi;
    const TensorField& A = structure.A;
    AuxTensorSet aux = aux_tensors(gen, structure, m, lc);
    TensorField piA = one_form_through_map(pi, A);
    TensorField AA = compose(A, A);
    const TensorField& Rg = rg.R;

    TensorField R(m.g.chart(), 1, 3);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    std::vector<Expr> t;
                    t.push_back(Rg(l, i, j, k));
                    switch (theta) {
                        case 1:
                            t.push_back(kHalf * (aux.alpha1(i, k) * A(l, j)));
                            t.push_back(-(kHalf * (aux.alpha1(j, k) * A(l, i))));
                            t.push_back(-(kHalf * (aux.beta1(i, j) * A(l, k))));
                            t.push_back(-(kHalf * (aux.gamma1(l, i, k) * pi(j))));
                            t.push_back(kHalf * (aux.gamma1(l, j, k) * pi(i)));
                            t.push_back(kHalf * (aux.delta1(l, i, j) * pi(k)));
                            break;
                        case 2:
                            t.push_back(-(kHalf * (aux.alpha2(i, k) * A(l, j))));
                            t.push_back(kHalf * (aux.alpha2(j, k) * A(l, i)));
                            t.push_back(kHalf * (aux.beta1(i, j) * A(l, k)));
                            t.push_back(kHalf * (aux.gamma2(l, i, k) * pi(j)));
                            t.push_back(-(kHalf * (aux.gamma2(l, j, k) * pi(i))));
                            t.push_back(-(kHalf * (aux.delta1(l, i, j) * pi(k))));
                            break;
                        case 3:
                        case 4:
                            t.push_back(kHalf * (aux.alpha2(i, k) * A(l, j)));
                            t.push_back(kHalf * (aux.alpha1(j, k) * A(l, i)));
                            // the AZ coefficient swaps alpha1/alpha2 between
                            // theta = 3 and theta = 4
                            t.push_back(-(kHalf *
                                          ((theta == 3
                                                ? aux.alpha2(i, j) + aux.alpha1(j, i)
                                                : aux.alpha1(i, j) + aux.alpha2(j, i)) *
                                           A(l, k))));
                            t.push_back(-(kHalf * (aux.gamma1(l, i, k) * pi(j))));
                            t.push_back(-(kHalf * (aux.gamma1(l, j, k) * pi(i))));
                            t.push_back(kHalf *
                                        ((aux.delta1(l, i, j) +
                                          Expr::constant(2.0) *
                                              aux.gamma1(l, j, i)) *
                                         pi(k)));
                            if (theta == 4)
                                t.push_back(-(pi(k) * (pi(j) * AA(l, i) -
                                                       pi(i) * AA(l, j))));
                            break;
                        case 5:
                            t.push_back(kQuarter *
                                        (pi(i) * (pi(j) * AA(l, k) -
                                                  piA(k) * A(l, j))));
                            t.push_back(kQuarter *
                                        (pi(j) * (pi(i) * AA(l, k) -
                                                  piA(k) * A(l, i))));
                            t.push_back(-(kQuarter *
                                          (pi(k) *
                                           (pi(i) * AA(l, j) +
                                            pi(j) * AA(l, i) -
                                            piA(i) * A(l, j) -
                                            piA(j) * A(l, i)))));
                            break;
                        default:
                            break;
                    }
                    R.component(l, i, j, k) = sum_of(t);
                }
    return CurvatureField{std::move(R), theta == 1   ? CurvatureTag::r1
                                        : theta == 2 ? CurvatureTag::r2
                                        : theta == 3 ? CurvatureTag::r3
                                        : theta == 4 ? CurvatureTag::r4
                                                     : CurvatureTag::r5};
}

TensorField m_tensor(const GeneratorField& gen, const StructureField& structure,
                     const GeneralizedMetric& m,
                     const ConnectionCoefficients& lc, int which) {
    if (which != 1 && which != 2)
        throw ShapeError("m_tensor expects which = 1 or 2");
    int n = m.g.dimension();
    const TensorField& pi = gen.pi;
    const TensorField& A = structure.A;
    AuxTensorSet aux = aux_tensors(gen, structure, m, lc);
    const TensorField& alpha = which == 1 ? aux.alpha1 : aux.alpha2;
    const TensorField& gamma = which == 1 ? aux.gamma1 : aux.gamma2;
    TensorField dpi = covariant_derivative(lc, pi);
    TensorField dA = covariant_derivative(lc, A);

    TensorField M(m.g.chart(), 1, 3);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    M.component(l, i, j, k) =
                        alpha(i, k) * A(l, j) - gamma(l, i, k) * pi(j) -
                        dpi(i, j) * A(l, k) + pi(k) * dA(l, i, j);
    return M;
}

TensorField v_tensor(const GeneratorField& gen, const StructureField& structure,
                     const GeneralizedMetric& m,
                     const ConnectionCoefficients& lc) {
    int n = m.g.dimension();
    const TensorField& pi = gen.pi;
    const TensorField& A = structure.A;
    TensorField dpi = covariant_derivative(lc, pi);
    TensorField dA = covariant_derivative(lc, A);

    TensorField V(m.g.chart(), 1, 3);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    V.component(l, i, j, k) =
                        pi(i) * dA(l, j, k) + pi(k) * dA(l, i, j) +
                        dpi(i, k) * A(l, j) - dpi(i, j) * A(l, k);
    return V;
}

TensorField nijenhuis_classical(const StructureField& structure) {
    const TensorField& A = structure.A;
    int n = A.dimension();
    TensorField N(A.chart(), 1, 2);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                std::vector<Expr> terms;
                for (int m = 0; m < n; ++m) {
                    terms.push_back(A(m, i) * differentiate(A(k, j), m));
                    terms.push_back(-(A(m, j) * differentiate(A(k, i), m)));
                    terms.push_back(-(A(k, m) * differentiate(A(m, j), i)));
                    terms.push_back(A(k, m) * differentiate(A(m, i), j));
                }
                Expr v = sum_of(terms);
                N.component(k, i, j) = v;
                N.component(k, j, i) = -v;
            }
    return N;
}

TensorField n1_tensor(const StructureField& structure,
                      const TensorField& nabla_A) {
    const TensorField& A = structure.A;
    if (nabla_A.rank_up() != 1 || nabla_A.rank_down() != 2)
        throw ShapeError("n1_tensor expects a (1,2) derivative of A");
    int n = A.dimension();
    const TensorField& D = nabla_A;  // [l][direction][argument]
    TensorField N1(A.chart(), 1, 2);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                std::vector<Expr> terms;
                for (int m = 0; m < n; ++m) {
                    terms.push_back(A(m, i) * D(l, m, j));
                    terms.push_back(-(A(m, j) * D(l, m, i)));
                    terms.push_back(-(A(l, m) * D(m, i, j)));
                    terms.push_back(A(l, m) * D(m, j, i));
                }
                Expr v = sum_of(terms);
                N1.component(l, i, j) = v;
                N1.component(l, j, i) = -v;
            }
    return N1;
}

TensorField exterior_derivative_F(const TensorField& F) {
    if (F.rank_up() != 0 || F.rank_down() != 2)
        throw ShapeError("exterior derivative expects a (0,2) form");
    int n = F.dimension();
    TensorField dF(F.chart(), 0, 3);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                dF.component(i, j, k) = differentiate(F(j, k), i) +
                                        differentiate(F(k, i), j) +
                                        differentiate(F(i, j), k);
    return dF;
}

TensorField d_connection_F(const ConnectionCoefficients& L,
                           const TensorField& F) {
    TensorField dF = covariant_derivative(L, F);  // [dir][j][k]
    return cyclic_sum(dF, {0, 1, 2});
}

TensorField cyclic_sum(const TensorField& t, std::array<int, 3> slots) {
    int r = t.rank();
    for (int s : slots)
        if (s < 0 || s >= r) throw ShapeError("cyclic slot out of range");
    if (slots[0] == slots[1] || slots[1] == slots[2] || slots[0] == slots[2])
        throw ShapeError("cyclic slots must be distinct");
    bool all_upper = slots[0] < t.rank_up() && slots[1] < t.rank_up() &&
                     slots[2] < t.rank_up();
    bool all_lower = slots[0] >= t.rank_up() && slots[1] >= t.rank_up() &&
                     slots[2] >= t.rank_up();
    if (!all_upper && !all_lower)
        throw ShapeError("cyclic slots must share variance");

    TensorField out(t.chart(), t.rank_up(), t.rank_down());
    std::vector<int> rot(static_cast<std::size_t>(r));
    for (std::size_t flat = 0; flat < t.size(); ++flat) {
        auto idx = t.unflatten(flat);
        auto a = static_cast<std::size_t>(slots[0]);
        auto b = static_cast<std::size_t>(slots[1]);
        auto c = static_cast<std::size_t>(slots[2]);
        rot = idx;
        // f(X,Y,Z) + f(Y,Z,X) + f(Z,X,Y)
        rot[a] = idx[b];
        rot[b] = idx[c];
        rot[c] = idx[a];
        Expr second = t.at(rot);
        rot[a] = idx[c];
        rot[b] = idx[a];
        rot[c] = idx[b];
        Expr third = t.at(rot);
        out.flat(flat) = t.at(idx) + second + third;
    }
    return out;
}

}  // namespace qsnm
