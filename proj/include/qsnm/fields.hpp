#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsnm/expr.hpp"

namespace qsnm {

using Point = std::vector<double>;

// |det g| below this at a sample point counts as degenerate.
inline constexpr double kDegeneracyEpsilon = 1e-8;

struct DegeneracyError : std::runtime_error {
    DegeneracyError(const std::string& what, Point p)
        : std::runtime_error(what), point(std::move(p)) {}
    Point point;
};

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A single coordinate chart: dimension, coordinate names, and the box the
// verification harness samples from (default [-1,1]^n).
class Chart {
  public:
    static std::shared_ptr<const Chart> make(
        std::vector<std::string> coordinate_names,
        std::vector<std::array<double, 2>> sample_domain = {});

    int dimension() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& coordinate_names() const { return names_; }
    const std::vector<std::array<double, 2>>& sample_domain() const {
        return box_;
    }

  private:
    std::vector<std::string> names_;
    std::vector<std::array<double, 2>> box_;
};

using ChartPtr = std::shared_ptr<const Chart>;

// Uniform points in the sample box shrunk by 10% from each face, which keeps
// user expressions like 1/u away from boundary poles. Deterministic in seed.
std::vector<Point> sample_points(const Chart& chart, int count,
                                 std::uint64_t seed);

// The fixed sample set used when validating user-supplied manifolds.
std::vector<Point> standard_sample_points(const Chart& chart, int count = 50);

// Dense numeric value of a tensor field at one point.
struct NumericTensor {
    int dimension = 0;
    int rank_up = 0;
    int rank_down = 0;
    std::vector<double> values;  // row-major, upper indices first

    double at(std::span<const int> idx) const;
    double max_abs() const;
};

double max_abs_diff(const NumericTensor& a, const NumericTensor& b);

// A valence-(r,s) field of scalar expressions on a chart: the carrier for
// every indexed object in the engine (g, F, A, pi, torsion, curvature, ...).
// Components are stored row-major with upper indices first; mutation is a
// construction-phase affair, after which fields are treated as immutable.
class TensorField {
  public:
    TensorField(ChartPtr chart, int rank_up, int rank_down);  // zero field

    static TensorField from_components(ChartPtr chart, int rank_up,
                                       int rank_down,
                                       std::vector<Expr> components);

    const ChartPtr& chart() const { return chart_; }
    int dimension() const { return chart_->dimension(); }
    int rank_up() const { return rank_up_; }
    int rank_down() const { return rank_down_; }
    int rank() const { return rank_up_ + rank_down_; }
    std::size_t size() const { return comps_.size(); }

    const Expr& at(std::span<const int> idx) const;
    Expr& at(std::span<const int> idx);

    template <class... I>
    const Expr& operator()(I... idx) const {
        const int buf[] = {static_cast<int>(idx)...};
        return at(std::span<const int>(buf, sizeof...(I)));
    }

    template <class... I>
    Expr& component(I... idx) {
        int buf[] = {static_cast<int>(idx)...};
        return at(std::span<const int>(buf, sizeof...(I)));
    }

    std::size_t flatten(std::span<const int> idx) const;
    std::vector<int> unflatten(std::size_t flat) const;
    const Expr& flat(std::size_t i) const { return comps_[i]; }
    Expr& flat(std::size_t i) { return comps_[i]; }

    NumericTensor eval(std::span<const double> point) const;
    NumericTensor eval(std::span<const double> point, EvalCache& cache) const;

  private:
    ChartPtr chart_;
    int rank_up_;
    int rank_down_;
    std::vector<Expr> comps_;
};

// Componentwise algebra; operands must share a chart and valence.
TensorField operator+(const TensorField& a, const TensorField& b);
TensorField operator-(const TensorField& a, const TensorField& b);
TensorField operator*(double c, const TensorField& a);

// result(i_0, ..., i_{r-1}) = t(i_{perm[0]}, ..., i_{perm[r-1]}).
// Callers are responsible for only permuting slots of equal variance.
TensorField permute_slots(const TensorField& t, std::span<const int> perm);

// G = g + F with g symmetric, F skew-symmetric, g non-degenerate; carries the
// symbolic inverse metric (adjugate over determinant) used for every
// index-raising in the engine.
struct GeneralizedMetric {
    TensorField G;      // (0,2)
    TensorField g;      // (0,2) symmetric part
    TensorField F;      // (0,2) skew-symmetric part
    TensorField g_inv;  // (2,0)
    Expr det_g;
};

// The (1,1) tensor A with F(X,Y) = g(AX,Y), stored as A[k][i] for A^k_i.
struct StructureField {
    TensorField A;  // (1,1)
};

// Generator 1-form pi and its g-dual vector field P, pi(X) = g(X,P).
struct GeneratorField {
    TensorField pi;  // (0,1)
    TensorField P;   // (1,0)
};

// Symmetric/skew split of a (0,2) field plus inverse-metric construction.
// Throws DegeneracyError (with the point) if |det g| <= eps anywhere on the
// standard sample set.
GeneralizedMetric split_metric(const TensorField& G,
                               double eps = kDegeneracyEpsilon);

// Numeric inverse metric at a point (Gauss-Jordan); independent of the
// symbolic adjugate route, which makes it a handy cross-check.
std::vector<double> metric_inverse_at(const TensorField& g,
                                      std::span<const double> point,
                                      double eps = kDegeneracyEpsilon);

StructureField compute_A(const GeneralizedMetric& m);
GeneratorField compute_P(const GeneralizedMetric& m, const TensorField& pi);

// (A.B)^k_i = A^k_m B^m_i for (1,1) fields.
TensorField compose(const TensorField& a, const TensorField& b);

// Symbolic determinant / adjugate of an n x n matrix of expressions
// (row-major). adj satisfies M * adj = det * I, i.e. adj[j][k] = cofactor_kj.
Expr symbolic_det(std::span<const Expr> m, int n);
std::vector<Expr> symbolic_adjugate(std::span<const Expr> m, int n);

}  // namespace qsnm
