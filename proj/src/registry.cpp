#include "qsnm/registry.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace qsnm {

namespace {

const Expr kHalf = Expr::constant(0.5);

TensorField zero_field(ManifoldData& d, int r, int s) {
    return TensorField(d.chart(), r, s);
}

// pi scaled by (a - b): the torsion of the family connection is exactly the
// quarter-symmetric form built from this effective generator, which keeps the
// torsion identities meaningful for every (a, b).
TensorField effective_pi(ManifoldData& d) {
    double factor = d.params().a - d.params().b;
    return factor * d.gen().pi;
}

// (0,3) outer product pi_i F_{jk}
TensorField pi_tensor_F(ManifoldData& d, const TensorField& pi,
                        const TensorField& F) {
    int n = d.chart()->dimension();
    TensorField out(d.chart(), 0, 3);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                out.component(i, j, k) = pi(i) * F(j, k);
    return out;
}

// closed-form torsion factor*(pi_j A^k_i - pi_i A^k_j), stored [k][i][j]
TensorField torsion_closed_form(ManifoldData& d, double factor) {
    int n = d.chart()->dimension();
    const TensorField& pi = d.gen().pi;
    const TensorField& A = d.structure().A;
    Expr c = Expr::constant(factor);
    TensorField out(d.chart(), 1, 2);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.component(k, i, j) =
                    c * (pi(j) * A(k, i) - pi(i) * A(k, j));
    return out;
}

// T(T(X,Y),Z)^l_{ijk} = T^m_{ij} T^l_{mk}
TensorField torsion_of_torsion(ManifoldData& d) {
    int n = d.chart()->dimension();
    const TensorField& T = d.T1().T12;
    TensorField out(d.chart(), 1, 3);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    std::vector<Expr> terms;
                    for (int m = 0; m < n; ++m)
                        terms.push_back(T(m, i, j) * T(l, m, k));
                    out.component(l, i, j, k) = sum_of(terms);
                }
    return out;
}

// the right-hand side shared by the theta = 3, 4 skew-symmetry relations
TensorField skew_mixed_rhs(ManifoldData& d) {
    int n = d.chart()->dimension();
    const TensorField& pi = d.gen().pi;
    const TensorField& A = d.structure().A;
    const TensorField& dpi = d.dg_pi();
    const TensorField& dA = d.dg_A();
    TensorField out(d.chart(), 1, 3);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    out.component(l, i, j, k) =
                        dpi(j, k) * A(l, i) + dpi(i, k) * A(l, j) -
                        (dpi(i, j) + dpi(j, i)) * A(l, k) -
                        pi(i) * dA(l, j, k) - pi(j) * dA(l, i, k) +
                        pi(k) * (dA(l, i, j) + dA(l, j, i));
    return out;
}

// the pi/A^2 right-hand side of the theta = 5 skew-symmetry relation
TensorField skew_r5_rhs(ManifoldData& d) {
    int n = d.chart()->dimension();
    const TensorField& pi = d.gen().pi;
    const TensorField& A = d.structure().A;
    const TensorField& piA = d.piA();
    const TensorField& AA = d.AA();
    TensorField out(d.chart(), 1, 3);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    out.component(l, i, j, k) =
                        kHalf * (pi(i) * (pi(j) * AA(l, k) - piA(k) * A(l, j))) +
                        kHalf * (pi(j) * (pi(i) * AA(l, k) - piA(k) * A(l, i))) -
                        kHalf * (pi(k) * (pi(i) * AA(l, j) + pi(j) * AA(l, i) -
                                          piA(i) * A(l, j) - piA(j) * A(l, i)));
    return out;
}

// cyclic-sum arguments of the first Bianchi identities for theta = 1, 2, 3
TensorField bianchi_rhs_term(ManifoldData& d, int theta) {
    int n = d.chart()->dimension();
    const TensorField& pi = d.gen().pi;
    const TensorField& A = d.structure().A;
    const TensorField& piA = d.piA();
    const TensorField& dpi = d.dg_pi();
    const TensorField& dA = d.dg_A();
    TensorField out(d.chart(), 1, 3);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    Expr twist =
                        kHalf * ((pi(i) * piA(j) - piA(i) * pi(j)) * A(l, k));
                    Expr dA_skew = dA(l, j, k) - dA(l, k, j);
                    Expr dpi_skew = (dpi(i, j) - dpi(j, i)) * A(l, k);
                    switch (theta) {
                        case 1:
                            out.component(l, i, j, k) =
                                pi(i) * dA_skew - dpi_skew - twist;
                            break;
                        case 2:
                            out.component(l, i, j, k) =
                                dpi_skew - pi(i) * dA_skew - twist;
                            break;
                        default:  // theta == 3
                            out.component(l, i, j, k) =
                                (pi(i) * piA(j) - piA(i) * pi(j)) * A(l, k);
                            break;
                    }
                }
    return out;
}

// the reconstruction theorem's expression for the derivative of F in terms
// of torsion and the derivative of g
TensorField covderofF_rhs(ManifoldData& d) {
    int n = d.chart()->dimension();
    const TensorField& A = d.structure().A;
    const TensorField& t = d.T1().T03;
    const TensorField& G1 = d.nabla1_g();
    TensorField dgF = covariant_derivative(d.lc(), d.metric().F);
    TensorField out(d.chart(), 0, 3);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                std::vector<Expr> torsion_terms;
                std::vector<Expr> metric_terms;
                for (int m = 0; m < n; ++m) {
                    torsion_terms.push_back(t(i, j, m) * A(m, k));
                    torsion_terms.push_back(t(k, i, m) * A(m, j));
                    torsion_terms.push_back(A(m, k) * t(m, i, j));
                    torsion_terms.push_back(A(m, k) * t(m, j, i));
                    torsion_terms.push_back(A(m, j) * t(i, m, k));
                    torsion_terms.push_back(A(m, j) * t(k, m, i));
                    metric_terms.push_back(A(m, j) * G1(i, m, k));
                    metric_terms.push_back(-(A(m, k) * G1(i, j, m)));
                    metric_terms.push_back(-(A(m, k) * G1(j, m, i)));
                    metric_terms.push_back(A(m, j) * G1(k, m, i));
                    metric_terms.push_back(A(m, k) * G1(m, j, i));
                    metric_terms.push_back(-(A(m, j) * G1(m, k, i)));
                }
                out.component(i, j, k) =
                    dgF(i, j, k) + kHalf * sum_of(torsion_terms) +
                    kHalf * sum_of(metric_terms);
            }
    return out;
}

// -T(X,Y,AZ) - T(Y,Z,AX) - T(Z,X,AY) + cyclic derivative of F
TensorField exterior_from_torsion_rhs(ManifoldData& d) {
    TensorField t_with_A = compose_slot(d.T1().T03, 2, d.structure().A);
    TensorField torsion_part = cyclic_sum(t_with_A, {0, 1, 2});
    TensorField derivative_part = cyclic_sum(d.nabla1_F(), {0, 1, 2});
    return derivative_part - torsion_part;
}

// -T(AX,AY) - A^2 T(X,Y) + A T(AX,Y) + A T(X,AY)
TensorField torsion_combination(ManifoldData& d) {
    const TensorField& T = d.T1().T12;
    const TensorField& A = d.structure().A;
    return apply_map(A, compose_slot(T, 1, A), 0) +
           apply_map(A, compose_slot(T, 2, A), 0) -
           compose_slot(compose_slot(T, 1, A), 2, A) -
           apply_map(d.AA(), T, 0);
}

const std::vector<int> kSwapXY{0, 2, 1, 3};

std::vector<IdentityCheck> build_registry() {
    std::vector<IdentityCheck> checks;

    checks.push_back(
        {"torsion_matches", "whose torsion tensor is given with",
         CheckKind::residual, false, [](ManifoldData& d) {
             return std::vector<CheckPair>{
                 {"T(L1) = (a-b)(pi(Y)AX - pi(X)AY)", d.T1().T12,
                  torsion_closed_form(d, d.params().a - d.params().b)}};
         }});

    checks.push_back(
        {"nabla1_g_closed", "and which satisfies", CheckKind::residual, true,
         [](ManifoldData& d) {
             return std::vector<CheckPair>{
                 {"engine vs closed form", d.nabla1_g(),
                  nabla1_g_closed(d.gen(), d.structure(), d.metric())}};
         }});

    checks.push_back(
        {"nabla1_F_closed", "For covariant derivative of skew-symmetric part",
         CheckKind::residual, true, [](ManifoldData& d) {
             return std::vector<CheckPair>{
                 {"engine vs closed form", d.nabla1_F(),
                  nabla1_F_closed(d.gen(), d.structure(), d.metric(), d.lc())}};
         }});

    checks.push_back(
        {"nabla1_G_closed",
         "we obtain the covariant derivative of generalized metric",
         CheckKind::residual, true, [](ManifoldData& d) {
             return std::vector<CheckPair>{
                 {"engine vs closed form", d.nabla1_G(),
                  nabla1_G_closed(d.gen(), d.structure(), d.metric(), d.lc())}};
         }});

    checks.push_back(
        {"nabla1_A_closed",
         "we obtain the covariant derivative of tensor $A$",
         CheckKind::residual, true, [](ManifoldData& d) {
             return std::vector<CheckPair>{
                 {"engine vs closed form", d.nabla1_A(),
                  nabla1_A_closed(d.gen(), d.structure(), d.metric(), d.lc())}};
         }});

    checks.push_back(
        {"nabla1_pi_closed", "For covariant derivative of 1-form",
         CheckKind::residual, true, [](ManifoldData& d) {
             return std::vector<CheckPair>{
                 {"engine vs closed form", d.nabla1_pi(),
                  nabla1_pi_closed(d.gen(), d.structure(), d.metric(), d.lc())}};
         }});

    checks.push_back(
        {"nabla2_relations",
         "is also non-metric and satisfies the following relations",
         CheckKind::residual, true, [](ManifoldData& d) {
             DualDerivatives dual =
                 nabla2_relations(d.gen(), d.structure(), d.metric(), d.lc());
             return std::vector<CheckPair>{
                 {"nabla2 g", d.nabla2_g(), dual.g2},
                 {"nabla2 F", d.nabla2_F(), dual.F2},
                 {"nabla2 G", d.nabla2_G(), dual.G2},
                 {"nabla2 A", d.nabla2_A(), dual.A2}};
         }});

    checks.push_back(
        {"nabla0_equals_LC", "coincides with Levi-Civita connection",
         CheckKind::residual, true, [](ManifoldData& d) {
             return std::vector<CheckPair>{{"L0 = Gamma",
                                            d.L0().as_tensor_field(),
                                            d.lc().as_tensor_field()}};
         }});

    checks.push_back(
        {"torsion_identities", "denote the cyclic sum with respect",
         CheckKind::residual, false, [](ManifoldData& d) {
             int n = d.chart()->dimension();
             const TensorField& A = d.structure().A;
             const TensorField& t03 = d.T1().T03;
             TensorField pi_e = effective_pi(d);
             TensorField piA_e = one_form_through_map(pi_e, A);

             std::vector<CheckPair> pairs;
             // sigma T = -2 sigma pi F
             pairs.push_back(
                 {"sigma T(X,Y,Z) + 2 sigma pi(X)F(Y,Z) = 0",
                  cyclic_sum(t03, {0, 1, 2}),
                  -2.0 * cyclic_sum(pi_tensor_F(d, pi_e, d.metric().F),
                                    {0, 1, 2})});
             // 2 sigma pi(X)F(AY,AZ) = -sigma(T(AX,Y,AZ) + T(X,AY,AZ))
             TensorField FAA =
                 compose_slot(compose_slot(d.metric().F, 0, A), 1, A);
             TensorField lhs_b =
                 2.0 * cyclic_sum(pi_tensor_F(d, pi_e, FAA), {0, 1, 2});
             TensorField t_last = compose_slot(t03, 2, A);
             TensorField rhs_b =
                 -1.0 * (cyclic_sum(compose_slot(t_last, 0, A), {0, 1, 2}) +
                         cyclic_sum(compose_slot(t_last, 1, A), {0, 1, 2}));
             pairs.push_back({"2 sigma pi(X)F(AY,AZ) + sigma(T(AX,Y,AZ)"
                              " + T(X,AY,AZ)) = 0",
                              std::move(lhs_b), std::move(rhs_b)});
             // sigma T(T(X,Y),Z), both stated forms
             TensorField tt = cyclic_sum(torsion_of_torsion(d), {1, 2, 3});
             TensorField mid(d.chart(), 1, 3);
             for (int l = 0; l < n; ++l)
                 for (int i = 0; i < n; ++i)
                     for (int j = 0; j < n; ++j)
                         for (int k = 0; k < n; ++k)
                             mid.component(l, i, j, k) =
                                 pi_e(i) * (piA_e(j) * A(l, k) -
                                            piA_e(k) * A(l, j));
             pairs.push_back({"sigma T(T(X,Y),Z) = sigma pi(X)(pi(AY)AZ"
                              " - pi(AZ)AY)",
                              tt, cyclic_sum(mid, {1, 2, 3})});
             TensorField piT(d.chart(), 1, 3);
             for (int l = 0; l < n; ++l)
                 for (int i = 0; i < n; ++i)
                     for (int j = 0; j < n; ++j)
                         for (int k = 0; k < n; ++k)
                             piT.component(l, i, j, k) =
                                 piA_e(i) * d.T1().T12(l, j, k);
             pairs.push_back({"sigma T(T(X,Y),Z) = sigma pi(AX)T(Y,Z)",
                              std::move(tt), cyclic_sum(piT, {1, 2, 3})});
             // sigma T(X,Y,AZ) = 0 and sigma T(AX,AY,Z) = 0
             pairs.push_back({"sigma T(X,Y,AZ) = 0",
                              cyclic_sum(t_last, {0, 1, 2}),
                              zero_field(d, 0, 3)});
             pairs.push_back(
                 {"sigma T(AX,AY,Z) = 0",
                  cyclic_sum(compose_slot(compose_slot(t03, 0, A), 1, A),
                             {0, 1, 2}),
                  zero_field(d, 0, 3)});
             return pairs;
         }});

    checks.push_back(
        {"d1F_equals_dF", "coincides with that of skew-symmetric part",
         CheckKind::residual, true, [](ManifoldData& d) {
             return std::vector<CheckPair>{
                 {"cyclic nabla1 F = dF", cyclic_sum(d.nabla1_F(), {0, 1, 2}),
                  exterior_derivative_F(d.metric().F)}};
         }});

    checks.push_back(
        {"covderofF_identity",
         "The covariant derivative $\\overset{1}{\\nabla}F$ of the skew "
         "symmetric part",
         CheckKind::residual, false, [](ManifoldData& d) {
             return std::vector<CheckPair>{
                 {"nabla1 F from torsion and nabla1 g", d.nabla1_F(),
                  covderofF_rhs(d)}};
         }});

    checks.push_back(
        {"exterior_derivative_F_identity",
         "the exterior derivative $\\mathrm{d}F$ of the skew symmetric part",
         CheckKind::residual, false, [](ManifoldData& d) {
             return std::vector<CheckPair>{
                 {"dF from torsion and nabla1 F",
                  exterior_derivative_F(d.metric().F),
                  exterior_from_torsion_rhs(d)}};
         }});

    checks.push_back(
        {"N_equals_N1", "Nijenhuis tensor $N$ coincides with",
         CheckKind::residual, false, [](ManifoldData& d) {
             return std::vector<CheckPair>{
                 {"N = N1", nijenhuis_classical(d.structure()),
                  n1_tensor(d.structure(), d.nabla1_A())}};
         }});

    checks.push_back(
        {"torsion_combination_zero", "Since for torsion tensor",
         CheckKind::residual, false, [](ManifoldData& d) {
             return std::vector<CheckPair>{{"-T(AX,AY) - A^2T(X,Y) + AT(AX,Y)"
                                            " + AT(X,AY) = 0",
                                            torsion_combination(d),
                                            zero_field(d, 1, 2)}};
         }});

    checks.push_back(
        {"R0_equals_Rg", "coincides with Riemannian curvature tensor",
         CheckKind::residual, true, [](ManifoldData& d) {
             return std::vector<CheckPair>{
                 {"R0 = Rg", d.R_op(0).R, d.Rg().R}};
         }});

    checks.push_back(
        {"curvature_closed_forms", "satisfy the following relations",
         CheckKind::residual, true, [](ManifoldData& d) {
             std::vector<CheckPair> pairs;
             for (int theta = 1; theta <= 5; ++theta) {
                 auto closed = curvature_closed_form(
                     d.gen(), d.structure(), d.metric(), d.lc(), d.Rg(), theta);
                 pairs.push_back({"R" + std::to_string(theta) +
                                      " operator vs closed form",
                                  d.R_op(theta).R, std::move(closed.R)});
             }
             return pairs;
         }});

    checks.push_back(
        {"M_form_pair", "If we define (1,3) tensor", CheckKind::residual, true,
         [](ManifoldData& d) {
             TensorField M1 =
                 m_tensor(d.gen(), d.structure(), d.metric(), d.lc(), 1);
             TensorField M2 =
                 m_tensor(d.gen(), d.structure(), d.metric(), d.lc(), 2);
             return std::vector<CheckPair>{
                 {"R1 - Rg = (M1 - M1 swapped)/2", d.R_op(1).R - d.Rg().R,
                  0.5 * (M1 - permute_slots(M1, kSwapXY))},
                 {"R2 - Rg = -(M2 - M2 swapped)/2", d.R_op(2).R - d.Rg().R,
                  -0.5 * (M2 - permute_slots(M2, kSwapXY))}};
         }});

    checks.push_back(
        {"skew_symmetry", "the skew-symmetric properties of curvature tensors",
         CheckKind::residual, true, [](ManifoldData& d) {
             TensorField mixed_rhs = skew_mixed_rhs(d);
             auto skew_sum = [&](int theta) {
                 const TensorField& R = d.R_op(theta).R;
                 return R + permute_slots(R, kSwapXY);
             };
             return std::vector<CheckPair>{
                 {"R1 antisymmetric", skew_sum(1), zero_field(d, 1, 3)},
                 {"R2 antisymmetric", skew_sum(2), zero_field(d, 1, 3)},
                 {"R3 symmetrized part", skew_sum(3), mixed_rhs},
                 {"R4 symmetrized part", skew_sum(4), mixed_rhs},
                 {"R5 symmetrized part", skew_sum(5), skew_r5_rhs(d)},
                 {"R5 - R5 swapped = 2 Rg",
                  d.R_op(5).R - permute_slots(d.R_op(5).R, kSwapXY),
                  2.0 * d.Rg().R}};
         }});

    checks.push_back(
        {"bianchi_R1_R2_R3", "we will obtain the first Bianchi identities",
         CheckKind::residual, true, [](ManifoldData& d) {
             std::vector<CheckPair> pairs;
             for (int theta = 1; theta <= 3; ++theta)
                 pairs.push_back(
                     {"sigma R" + std::to_string(theta) + " matches its display",
                      cyclic_sum(d.R_op(theta).R, {1, 2, 3}),
                      cyclic_sum(bianchi_rhs_term(d, theta), {1, 2, 3})});
             return pairs;
         }});

    checks.push_back(
        {"bianchi_R4_R5", "we will obtain the first Bianchi identities",
         CheckKind::residual, true, [](ManifoldData& d) {
             return std::vector<CheckPair>{
                 {"sigma R4 = 0", cyclic_sum(d.R_op(4).R, {1, 2, 3}),
                  zero_field(d, 1, 3)},
                 {"sigma R5 = 0", cyclic_sum(d.R_op(5).R, {1, 2, 3}),
                  zero_field(d, 1, 3)}};
         }});

    checks.push_back(
        {"conjugate_symmetry", "where $V$ is (1,3) type tensor given with",
         CheckKind::co_vanishing, true, [](ManifoldData& d) {
             TensorField V =
                 v_tensor(d.gen(), d.structure(), d.metric(), d.lc());
             return std::vector<CheckPair>{
                 {"R1 vs R2", d.R_op(1).R, d.R_op(2).R},
                 {"V vs V swapped", V, permute_slots(V, kSwapXY)}};
         }});

    checks.push_back(
        {"reconstruction_round_trip",
         "uniquely determined by the following formula", CheckKind::residual,
         false, [](ManifoldData& d) {
             auto rebuilt = reconstruct_connection(d.T1(), d.nabla1_g(),
                                                   d.metric(), d.lc());
             return std::vector<CheckPair>{{"rebuilt connection equals L1",
                                            rebuilt.as_tensor_field(),
                                            d.L1().as_tensor_field()}};
         }});

    checks.push_back(
        {"general_ab_torsion", "where $a$ and $b$ are different real numbers",
         CheckKind::residual, false, [](ManifoldData& d) {
             std::vector<CheckPair> pairs;
             for (QSFamilyParams ab : {QSFamilyParams{1.0, 0.0},
                                       QSFamilyParams{0.0, -1.0},
                                       QSFamilyParams{2.0, 0.5}}) {
                 auto Lab = qs_connection(d.lc(), d.gen(), d.structure(), ab);
                 std::ostringstream label;
                 label << "torsion scaling for a=" << ab.a << " b=" << ab.b;
                 pairs.push_back({label.str(),
                                  torsion(Lab, d.metric()).T12,
                                  torsion_closed_form(d, ab.a - ab.b)});
             }
             auto Leq =
                 qs_connection(d.lc(), d.gen(), d.structure(), {1.0, 1.0});
             pairs.push_back({"a = b has zero torsion",
                              torsion(Leq, d.metric()).T12,
                              zero_field(d, 1, 2)});
             return pairs;
         }});

    return checks;
}

}  // namespace

const std::vector<IdentityCheck>& registry() {
    static const std::vector<IdentityCheck> checks = build_registry();
    return checks;
}

// ---------------------------------------------------------------------------
// Running checks

namespace {

constexpr std::uint64_t kSampleSeedSalt = 0x9d5ab1e5eed5ull;

struct PairStats {
    double max_abs = 0.0;
    double scale = 0.0;
    double rel() const { return max_abs / (1.0 + scale); }
};

struct ActiveCheck {
    const IdentityCheck* check;
    std::vector<CheckPair> pairs;
    std::vector<PairStats> stats;
    bool inconclusive = false;
    std::string note;
};

CheckReport finalize(const ActiveCheck& ac, int points, double tol) {
    CheckReport rep;
    rep.name = ac.check->name;
    rep.anchor = ac.check->anchor;
    rep.points = points;
    if (ac.inconclusive) {
        rep.pass = false;
        rep.max_abs_err = std::numeric_limits<double>::quiet_NaN();
        rep.max_rel_err = std::numeric_limits<double>::quiet_NaN();
        rep.note = ac.note;
        return rep;
    }
    double max_abs = 0.0;
    double max_rel = 0.0;
    for (const PairStats& st : ac.stats) {
        max_abs = std::max(max_abs, st.max_abs);
        max_rel = std::max(max_rel, st.rel());
    }
    rep.max_abs_err = max_abs;
    rep.max_rel_err = max_rel;
    if (ac.check->kind == CheckKind::co_vanishing) {
        bool first_small = ac.stats.at(0).rel() <= tol;
        bool second_small = ac.stats.at(1).rel() <= tol;
        rep.pass = first_small == second_small;
    } else {
        rep.pass = max_rel <= tol;
    }
    return rep;
}

std::vector<CheckReport> evaluate_checks(
    const std::vector<const IdentityCheck*>& checks, ManifoldData& data,
    int num_points, std::uint64_t seed, double tol) {
    std::vector<ActiveCheck> active;
    active.reserve(checks.size());
    for (const IdentityCheck* c : checks) {
        ActiveCheck ac;
        ac.check = c;
        try {
            ac.pairs = c->build(data);
            ac.stats.assign(ac.pairs.size(), PairStats{});
        } catch (const DomainError& err) {
            ac.inconclusive = true;
            ac.note = std::string("inconclusive: ") + err.what();
        }
        active.push_back(std::move(ac));
    }

    auto points = sample_points(*data.chart(), num_points,
                                seed ^ kSampleSeedSalt);
    for (const Point& p : points) {
        EvalCache cache;  // shared across every pair at this point
        for (ActiveCheck& ac : active) {
            if (ac.inconclusive) continue;
            try {
                for (std::size_t q = 0; q < ac.pairs.size(); ++q) {
                    auto lv = ac.pairs[q].lhs.eval(p, cache);
                    auto rv = ac.pairs[q].rhs.eval(p, cache);
                    PairStats& st = ac.stats[q];
                    st.max_abs = std::max(st.max_abs, max_abs_diff(lv, rv));
                    st.scale =
                        std::max({st.scale, lv.max_abs(), rv.max_abs()});
                }
            } catch (const DomainError& err) {
                ac.inconclusive = true;
                ac.note = std::string("inconclusive: ") + err.what();
            }
        }
    }

    std::vector<CheckReport> reports;
    reports.reserve(active.size());
    for (const ActiveCheck& ac : active)
        reports.push_back(finalize(ac, num_points, tol));
    return reports;
}

}  // namespace

CheckReport run_check(const IdentityCheck& check, ManifoldData& data,
                      int num_points, std::uint64_t seed, double tol) {
    return evaluate_checks({&check}, data, num_points, seed, tol).at(0);
}

SuiteReport run_registry(ManifoldData& data, int num_points,
                         std::uint64_t seed, double tol) {
    auto started = std::chrono::steady_clock::now();
    std::vector<const IdentityCheck*> applicable;
    for (const IdentityCheck& c : registry())
        if (!c.canonical_only || data.params().is_canonical())
            applicable.push_back(&c);

    SuiteReport suite;
    suite.checks = evaluate_checks(applicable, data, num_points, seed, tol);
    suite.seed = seed;
    suite.dimension = data.chart()->dimension();
    suite.spec_hash = fnv1a_hex(data.spec_json());
    suite.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
    return suite;
}

bool SuiteReport::all_pass() const {
    if (checks.empty()) return false;
    for (const CheckReport& c : checks)
        if (!c.pass) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Report emission

namespace {

std::string format_err(double v) {
    if (std::isnan(v)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return std::string(buf);
}

}  // namespace

std::string emit_report(const SuiteReport& report, ReportFormat format) {
    if (format == ReportFormat::json) {
        using ordered_json = nlohmann::ordered_json;
        ordered_json arr = ordered_json::array();
        for (const CheckReport& c : report.checks) {
            ordered_json entry;
            entry["name"] = c.name;
            entry["anchor"] = c.anchor;
            entry["max_abs_err"] = c.max_abs_err;
            entry["max_rel_err"] = c.max_rel_err;
            entry["points"] = c.points;
            entry["pass"] = c.pass;
            if (!c.note.empty()) entry["note"] = c.note;
            arr.push_back(std::move(entry));
        }
        ordered_json footer;
        footer["seed"] = report.seed;
        footer["dimension"] = report.dimension;
        footer["spec_hash"] = report.spec_hash;
        footer["elapsed_ms"] = report.elapsed_ms;
        arr.push_back(std::move(footer));
        return arr.dump(2) + "\n";
    }

    std::ostringstream os;
    int passed = 0;
    os << "  #  check                           max abs     max rel    points"
          "  verdict\n";
    for (std::size_t i = 0; i < report.checks.size(); ++i) {
        const CheckReport& c = report.checks[i];
        if (c.pass) ++passed;
        char line[160];
        std::snprintf(line, sizeof(line), "%3zu  %-30s %10s  %10s  %6d  %s\n",
                      i + 1, c.name.c_str(), format_err(c.max_abs_err).c_str(),
                      format_err(c.max_rel_err).c_str(), c.points,
                      c.pass ? "pass" : "FAIL");
        os << line;
        if (!c.note.empty()) os << "       " << c.note << "\n";
    }
    os << "suite: " << passed << "/" << report.checks.size()
       << " passed | seed=" << report.seed << " dim=" << report.dimension
       << " spec_hash=" << report.spec_hash
       << " elapsed_ms=" << report.elapsed_ms << "\n";
    return os.str();
}

}  // namespace qsnm
