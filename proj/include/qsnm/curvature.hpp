#pragma once

#include <array>

#include "qsnm/connection.hpp"

namespace qsnm {

// Components R^l_{ijk} mean R(e_i, e_j)e_k = R^l_{ijk} e_l, stored
// [l][i][j][k]. The tag records which of the curvature-type tensors of the
// connection pair this is.
enum class CurvatureTag { g, r0, r1, r2, r3, r4, r5 };

struct CurvatureField {
    TensorField R;  // (1,3)
    CurvatureTag tag;
};

// R(X,Y)Z = D_X D_Y Z - D_Y D_X Z - D_{[X,Y]} Z in a coordinate frame:
// R^l_{ijk} = d_i L^l_{jk} - d_j L^l_{ik} + L^l_{im}L^m_{jk} - L^l_{jm}L^m_{ik}.
CurvatureField curvature_standard(const ConnectionCoefficients& L,
                                  CurvatureTag tag);

// The three mixed tensors of the pair (D1, D2); kind selects which display:
//   3: D2_X D1_Y Z - D1_Y D2_X Z + D2_{D1_Y X} Z - D1_{D2_X Y} Z
//   4: D2_X D1_Y Z - D1_Y D2_X Z + D2_{D2_Y X} Z - D1_{D1_X Y} Z
//   5: (D1_X D1_Y Z - D2_Y D1_X Z + D2_X D2_Y Z - D1_Y D2_X Z)/2
// (bracket terms vanish in a coordinate frame).
CurvatureField curvature_mixed(const ConnectionCoefficients& L1,
                               const ConnectionCoefficients& L2, int kind);

// The auxiliary tensors of the canonical connection:
//   alpha1(X,Y) = (LCd_X pi)(Y) + pi(X)pi(AY)/2 - pi(AX)pi(Y)/2
//   alpha2(X,Y) = (LCd_X pi)(Y) - pi(X)pi(AY)/2 + pi(AX)pi(Y)/2
//   beta1(X,Y)  = (LCd_X pi)(Y) - (LCd_Y pi)(X)
//   gamma1(X,Y) = (LCd_X A)Y - pi(Y)A^2 X / 2
//   gamma2(X,Y) = (LCd_X A)Y + pi(Y)A^2 X / 2
//   delta1(X,Y) = (LCd_X A)Y - (LCd_Y A)X
struct AuxTensorSet {
    TensorField alpha1;  // (0,2)
    TensorField alpha2;  // (0,2)
    TensorField beta1;   // (0,2), skew
    TensorField gamma1;  // (1,2)
    TensorField gamma2;  // (1,2)
    TensorField delta1;  // (1,2), skew in the lower pair
};
AuxTensorSet aux_tensors(const GeneratorField& gen,
                         const StructureField& structure,
                         const GeneralizedMetric& m,
                         const ConnectionCoefficients& lc);

// Closed forms of R^theta (theta = 1..5) as corrections of the Riemannian
// tensor rg by the auxiliary tensors and pi/A^2 combinations.
CurvatureField curvature_closed_form(const GeneratorField& gen,
                                     const StructureField& structure,
                                     const GeneralizedMetric& m,
                                     const ConnectionCoefficients& lc,
                                     const CurvatureField& rg, int theta);

// M(X,Y)Z = alpha(X,Z)AY - gamma(X,Z)pi(Y) - (LCd_X pi)(Y)AZ
//           + pi(Z)(LCd_X A)Y, with (alpha1,gamma1) or (alpha2,gamma2).
TensorField m_tensor(const GeneratorField& gen, const StructureField& structure,
                     const GeneralizedMetric& m,
                     const ConnectionCoefficients& lc, int which);

// V(X,Y)Z = pi(X)(LCd_Y A)Z + pi(Z)(LCd_X A)Y + (LCd_X pi)(Z)AY
//           - (LCd_X pi)(Y)AZ; symmetric in (X,Y) iff R1 = R2.
TensorField v_tensor(const GeneratorField& gen, const StructureField& structure,
                     const GeneralizedMetric& m,
                     const ConnectionCoefficients& lc);

// Classical Nijenhuis tensor of the (1,1) field A:
// N^k_{ij} = A^m_i d_m A^k_j - A^m_j d_m A^k_i - A^k_m d_i A^m_j
//            + A^k_m d_j A^m_i.
TensorField nijenhuis_classical(const StructureField& structure);

// N1(X,Y) = (D_{AX} A)Y - (D_{AY} A)X - A(D_X A)Y + A(D_Y A)X, built from a
// precomputed derivative D A (direction-first slot order).
TensorField n1_tensor(const StructureField& structure,
                      const TensorField& nabla_A);

// dF_{ijk} = d_i F_{jk} + d_j F_{ki} + d_k F_{ij}.
TensorField exterior_derivative_F(const TensorField& F);

// Cyclic sum of the connection derivative of F:
// (D_X F)(Y,Z) + (D_Y F)(Z,X) + (D_Z F)(X,Y).
TensorField d_connection_F(const ConnectionCoefficients& L,
                           const TensorField& F);

// Sum over cyclic permutations of the three designated slots (all of the
// same variance).
TensorField cyclic_sum(const TensorField& t, std::array<int, 3> slots);

}  // namespace qsnm
