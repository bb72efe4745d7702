#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qsnm/curvature.hpp"

namespace qsnm {

struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat-file description of a manifold: coordinates, the generalized metric G
// and the generator 1-form pi as expression strings, plus an optional sample
// box and provenance note. See README for the JSON layout.
struct ManifoldSpec {
    int dimension = 0;
    std::vector<std::string> coordinates;
    std::vector<std::vector<std::string>> G;
    std::vector<std::string> pi;
    std::optional<std::vector<std::array<double, 2>>> box;
    std::string note;
};

ManifoldSpec parse_manifold_spec(const std::string& json_text);
std::string manifold_spec_to_json(const ManifoldSpec& spec);
ManifoldSpec read_manifold_file(const std::string& path);
void write_manifold_file(const ManifoldSpec& spec, const std::string& path);

// FNV-1a 64-bit, hex encoded; used to fingerprint spec files in reports.
std::string fnv1a_hex(std::string_view bytes);

struct RandomManifoldConfig {
    std::uint64_t seed = 0;
    int dimension = 3;          // 2..4
    double perturbation = 0.1;  // eps, must stay below 0.5
    int degree = 2;             // polynomial degree of the entries
    bool trig_terms = false;    // mix in sin/cos terms
};

// g = I + eps*S, F = eps*K with S symmetric and K skew-symmetric matrices of
// normalized random polynomials, pi a random polynomial covector. Entries are
// drawn from a single splitmix64 stream in a fixed order, so a seed pins the
// file bytes. Draws failing the non-degeneracy validation are retried with a
// re-derived stream, at most ten times.
ManifoldSpec random_manifold(const RandomManifoldConfig& cfg);

// A manifold spec turned into live fields, plus lazily built derived objects
// shared by the identity checks and the CLI.
class ManifoldData {
  public:
    explicit ManifoldData(const ManifoldSpec& spec,
                          QSFamilyParams params = QSFamilyParams::canonical());

    const ChartPtr& chart() const { return chart_; }
    const GeneralizedMetric& metric() const { return metric_; }
    const StructureField& structure() const { return structure_; }
    const GeneratorField& gen() const { return gen_; }
    const QSFamilyParams& params() const { return params_; }
    const std::string& spec_json() const { return spec_json_; }

    const ConnectionCoefficients& lc();
    const ConnectionCoefficients& L1();
    const ConnectionCoefficients& L2();
    const ConnectionCoefficients& L0();
    const TorsionField& T1();

    // engine derivatives under the family connection and its dual
    const TensorField& nabla1_g();
    const TensorField& nabla1_F();
    const TensorField& nabla1_G();
    const TensorField& nabla1_A();
    const TensorField& nabla1_pi();
    const TensorField& nabla2_g();
    const TensorField& nabla2_F();
    const TensorField& nabla2_G();
    const TensorField& nabla2_A();

    // Levi-Civita derivatives of pi and A
    const TensorField& dg_pi();
    const TensorField& dg_A();

    const CurvatureField& Rg();
    const CurvatureField& R_op(int theta);  // 0..5, operator route

    const AuxTensorSet& aux();
    const TensorField& piA();  // covector pi(A .)
    const TensorField& AA();   // A^2

    // Tensor catalog backing `compute`: g, F, G, A, pi, P, Gamma, L1, L2, L0,
    // T, R_g, R0..R5, alpha1..delta1, M1, M2, V, N, N1, dF, d1F.
    TensorField tensor_by_name(const std::string& name);
    static const std::vector<std::string>& tensor_names();

    // Fault-injection hook for sensitivity tests: adds `delta` to the single
    // coefficient L1^k_{ij} when the family connection is first built. Must
    // be called before anything derived from L1 exists.
    void perturb_L1(int k, int i, int j, double delta);

  private:
    ChartPtr chart_;
    GeneralizedMetric metric_;
    StructureField structure_;
    GeneratorField gen_;
    QSFamilyParams params_;
    std::string spec_json_;

    struct Perturbation {
        int k, i, j;
        double delta;
    };
    std::optional<Perturbation> perturbation_;

    std::optional<ConnectionCoefficients> lc_, L1_, L2_, L0_;
    std::optional<TorsionField> T1_;
    std::optional<TensorField> n1g_, n1F_, n1G_, n1A_, n1pi_;
    std::optional<TensorField> n2g_, n2F_, n2G_, n2A_;
    std::optional<TensorField> dg_pi_, dg_A_, piA_, AA_;
    std::optional<CurvatureField> R_[6];
    std::optional<CurvatureField> Rg_;
    std::optional<AuxTensorSet> aux_;
};

}  // namespace qsnm
