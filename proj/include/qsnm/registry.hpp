#pragma once

#include <functional>

#include "qsnm/manifold.hpp"

namespace qsnm {

enum class CheckKind {
    residual,      // pass iff max residual <= tol across every pair
    co_vanishing,  // exactly two pairs; pass iff both or neither <= tol
};

struct CheckPair {
    std::string label;
    TensorField lhs;
    TensorField rhs;
};

// One verifiable statement: a named LHS/RHS construction with the anchor
// phrase that identifies it in the source text.
struct IdentityCheck {
    std::string name;
    std::string anchor;
    CheckKind kind = CheckKind::residual;
    // closed forms derived for a = -b = 1/2 only; scale-free checks run for
    // any family parameters
    bool canonical_only = true;
    std::function<std::vector<CheckPair>(ManifoldData&)> build;
};

// The fixed catalog of 23 checks, in report order.
const std::vector<IdentityCheck>& registry();

struct CheckReport {
    std::string name;
    std::string anchor;
    double max_abs_err = 0.0;
    double max_rel_err = 0.0;
    int points = 0;
    bool pass = false;
    std::string note;  // non-empty for inconclusive runs (domain errors)
};

struct SuiteReport {
    std::vector<CheckReport> checks;
    std::uint64_t seed = 0;
    int dimension = 0;
    std::string spec_hash;
    std::int64_t elapsed_ms = 0;

    bool all_pass() const;
};

CheckReport run_check(const IdentityCheck& check, ManifoldData& data,
                      int num_points, std::uint64_t seed, double tol);

// Runs every applicable check over one shared sample set, reusing one
// evaluation cache per point across all pairs. Checks marked canonical_only
// are skipped when the data was built with non-canonical parameters.
SuiteReport run_registry(ManifoldData& data, int num_points,
                         std::uint64_t seed, double tol);

enum class ReportFormat { table, json };

std::string emit_report(const SuiteReport& report, ReportFormat format);

}  // namespace qsnm
