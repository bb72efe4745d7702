#pragma once

#include "qsnm/fields.hpp"

namespace qsnm {

enum class ConnectionKind {
    levi_civita,
    qs_family,
    dual,
    symmetric_part,
    reconstructed,
};

// Parameters of the one-chart connection family
//   D_X Y = LC_X Y + a pi(Y) AX + b pi(X) AY,
// whose torsion is (a-b)(pi(Y)AX - pi(X)AY). The canonical instance used for
// every closed-form identity is a = 1/2, b = -1/2.
struct QSFamilyParams {
    double a = 0.5;
    double b = -0.5;

    static QSFamilyParams canonical() { return {0.5, -0.5}; }
    bool is_canonical() const { return a == 0.5 && b == -0.5; }
};

// Coefficients L^k_{ij} with the convention D_{e_i} e_j = L^k_{ij} e_k,
// stored [k][i][j] (k the output index, i the direction, j the argument).
class ConnectionCoefficients {
  public:
    ConnectionCoefficients(ChartPtr chart, ConnectionKind provenance);

    const ChartPtr& chart() const { return chart_; }
    int dimension() const { return chart_->dimension(); }
    ConnectionKind provenance() const { return provenance_; }

    const Expr& at(int k, int i, int j) const;
    Expr& at(int k, int i, int j);

    // (1,2)-shaped view, mainly for evaluation and comparisons.
    TensorField as_tensor_field() const;

  private:
    ChartPtr chart_;
    ConnectionKind provenance_;
    std::vector<Expr> L_;
};

// Torsion in both valences: T^k_{ij} = L^k_{ij} - L^k_{ji} stored [k][i][j],
// and the lowered T_{ijk} = g(T(e_i,e_j), e_k).
struct TorsionField {
    TensorField T12;  // (1,2)
    TensorField T03;  // (0,3)
};

// Levi-Civita connection of the symmetric part via the Koszul formula.
ConnectionCoefficients christoffel(const GeneralizedMetric& m);

// L^k_{ij} = Gamma^k_{ij} + a pi_j A^k_i + b pi_i A^k_j.
ConnectionCoefficients qs_connection(const ConnectionCoefficients& lc,
                                     const GeneratorField& gen,
                                     const StructureField& structure,
                                     QSFamilyParams params);

// In a coordinate frame the dual connection is the index transposition
// L2^k_{ij} = L^k_{ji} (the Lie-bracket term vanishes).
ConnectionCoefficients dual_connection(const ConnectionCoefficients& L);

// L0 = (L1 + L2)/2 componentwise.
ConnectionCoefficients symmetric_part_connection(
    const ConnectionCoefficients& L1, const ConnectionCoefficients& L2);

TorsionField torsion(const ConnectionCoefficients& L,
                     const GeneralizedMetric& m);

// Generic covariant derivative. The direction index becomes the FIRST lower
// slot of the result, so component [k...][i, j...] is (D_{e_i} T)(...).
TensorField covariant_derivative(const ConnectionCoefficients& L,
                                 const TensorField& T);

// Closed forms of the canonical connection's derivatives (a = -b = 1/2).
// Slot order matches the engine: direction first.
TensorField nabla1_g_closed(const GeneratorField& gen,
                            const StructureField& structure,
                            const GeneralizedMetric& m);
TensorField nabla1_F_closed(const GeneratorField& gen,
                            const StructureField& structure,
                            const GeneralizedMetric& m,
                            const ConnectionCoefficients& lc);
TensorField nabla1_G_closed(const GeneratorField& gen,
                            const StructureField& structure,
                            const GeneralizedMetric& m,
                            const ConnectionCoefficients& lc);
TensorField nabla1_A_closed(const GeneratorField& gen,
                            const StructureField& structure,
                            const GeneralizedMetric& m,
                            const ConnectionCoefficients& lc);  // (1,2)
TensorField nabla1_pi_closed(const GeneratorField& gen,
                             const StructureField& structure,
                             const GeneralizedMetric& m,
                             const ConnectionCoefficients& lc);  // (0,2)

// The dual connection's derivatives of g, F, G and A (sign-flipped
// corrections relative to the canonical forms above).
struct DualDerivatives {
    TensorField g2;  // (0,3)
    TensorField F2;  // (0,3)
    TensorField G2;  // (0,3)
    TensorField A2;  // (1,2)
};
DualDerivatives nabla2_relations(const GeneratorField& gen,
                                 const StructureField& structure,
                                 const GeneralizedMetric& m,
                                 const ConnectionCoefficients& lc);

// Recovers a connection from its torsion and its derivative of g:
//   g(D_X Y, Z) = g(LC_X Y, Z)
//                 + (T(X,Y,Z) + T(Z,X,Y) - T(Y,Z,X))/2
//                 - ((D_X g)(Y,Z) + (D_Y g)(Z,X) - (D_Z g)(Y,X))/2,
// with the last index raised by the inverse metric.
ConnectionCoefficients reconstruct_connection(const TorsionField& torsion,
                                              const TensorField& nabla_g,
                                              const GeneralizedMetric& m,
                                              const ConnectionCoefficients& lc);

// Helper contractions shared by the closed forms and the curvature module.

// Covector X -> pi(AX): (pi.A)_i = pi_m A^m_i.
TensorField one_form_through_map(const TensorField& pi, const TensorField& A);

// Bilinear form (X,Y) -> g(AX, AY).
TensorField metric_through_map(const GeneralizedMetric& m,
                               const TensorField& A);

// Substitute A into a covariant slot: out[.., i at slot, ..] =
// sum_m A^m_i T[.., m at slot, ..].
TensorField compose_slot(const TensorField& t, int slot, const TensorField& A);

// Push A through an upper slot: out[.., l at slot, ..] =
// sum_m A^l_m T[.., m at slot, ..].
TensorField apply_map(const TensorField& A, const TensorField& t,
                      int upper_slot);

}  // namespace qsnm
