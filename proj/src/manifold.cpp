#include "qsnm/manifold.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qsnm/rng.hpp"

namespace qsnm {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json spec_to_ordered_json(const ManifoldSpec& spec) {
    ordered_json j;
    j["dimension"] = spec.dimension;
    j["coordinates"] = spec.coordinates;
    j["G"] = spec.G;
    j["pi"] = spec.pi;
    if (spec.box) {
        ordered_json box = ordered_json::array();
        for (const auto& [lo, hi] : *spec.box)
            box.push_back(ordered_json::array({lo, hi}));
        j["box"] = box;
    }
    if (!spec.note.empty()) j["note"] = spec.note;
    return j;
}

}  // namespace

ManifoldSpec parse_manifold_spec(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& err) {
        throw SpecError(std::string("manifold spec is not valid JSON: ") +
                        err.what());
    }
    if (!j.is_object()) throw SpecError("manifold spec must be a JSON object");

    ManifoldSpec spec;
    try {
        spec.dimension = j.at("dimension").get<int>();
        spec.coordinates = j.at("coordinates").get<std::vector<std::string>>();
        spec.G = j.at("G").get<std::vector<std::vector<std::string>>>();
        spec.pi = j.at("pi").get<std::vector<std::string>>();
        if (j.contains("box")) {
            std::vector<std::array<double, 2>> box;
            for (const auto& side : j.at("box")) {
                if (!side.is_array() || side.size() != 2)
                    throw SpecError("box entries must be [lo, hi] pairs");
                box.push_back({side[0].get<double>(), side[1].get<double>()});
            }
            spec.box = std::move(box);
        }
        if (j.contains("note")) spec.note = j.at("note").get<std::string>();
    } catch (const nlohmann::json::exception& err) {
        throw SpecError(std::string("malformed manifold spec: ") + err.what());
    }

    auto n = static_cast<std::size_t>(spec.dimension);
    if (spec.dimension < 2) throw SpecError("dimension must be at least 2");
    if (spec.coordinates.size() != n)
        throw SpecError("coordinates must list exactly `dimension` names");
    if (spec.G.size() != n)
        throw SpecError("G must be a square dimension x dimension matrix");
    for (const auto& row : spec.G)
        if (row.size() != n)
            throw SpecError("G must be a square dimension x dimension matrix");
    if (spec.pi.size() != n)
        throw SpecError("pi must list exactly `dimension` entries");
    if (spec.box && spec.box->size() != n)
        throw SpecError("box must list one [lo, hi] pair per coordinate");
    return spec;
}

std::string manifold_spec_to_json(const ManifoldSpec& spec) {
    return spec_to_ordered_json(spec).dump(2) + "\n";
}

ManifoldSpec read_manifold_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open manifold spec '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifold_spec(buf.str());
}

void write_manifold_file(const ManifoldSpec& spec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SpecError("cannot write manifold spec '" + path + "'");
    out << manifold_spec_to_json(spec);
    if (!out) throw SpecError("failed writing manifold spec '" + path + "'");
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

// ---------------------------------------------------------------------------
// Random manifolds

namespace {

// Dense polynomial with exponent tuples enumerated lexicographically and one
// coefficient drawn per monomial; optional trailing sin/cos terms. The whole
// entry is scaled so its sup-norm on [-1,1]^dim stays at most 1.
Expr random_entry(SplitMix64& rng, int dim, int degree, bool trig) {
    std::vector<std::pair<std::vector<int>, double>> monomials;
    std::vector<int> exponents(static_cast<std::size_t>(dim), 0);
    double mass = 0.0;
    auto enumerate = [&](auto&& self, int var, int remaining) -> void {
        if (var == dim) {
            double c = rng.next_symmetric();
            mass += std::abs(c);
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

    int sin_coord = 0, cos_coord = 0;
    double sin_coeff = 0.0, cos_coeff = 0.0;
    if (trig) {
        sin_coord = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(dim)));
        sin_coeff = rng.next_symmetric();
        cos_coord = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(dim)));
        cos_coeff = rng.next_symmetric();
        mass += std::abs(sin_coeff) + std::abs(cos_coeff);
    }

    double scale = mass > 1.0 ? 1.0 / mass : 1.0;
    std::vector<Expr> terms;
    for (const auto& [exps, c] : monomials) {
        Expr term = Expr::constant(c * scale);
        for (int v = 0; v < dim; ++v)
            if (exps[static_cast<std::size_t>(v)] > 0)
                term = term * pow(Expr::coordinate(v),
                                  exps[static_cast<std::size_t>(v)]);
        terms.push_back(term);
    }
    if (trig) {
        terms.push_back(Expr::constant(sin_coeff * scale) *
                        sin(Expr::coordinate(sin_coord)));
        terms.push_back(Expr::constant(cos_coeff * scale) *
                        cos(Expr::coordinate(cos_coord)));
    }
    return sum_of(terms);
}

}  // namespace

ManifoldSpec random_manifold(const RandomManifoldConfig& cfg) {
    if (cfg.dimension < 2 || cfg.dimension > 4)
        throw SpecError("random manifolds support dimensions 2 to 4");
    if (!(cfg.perturbation >= 0.0 && cfg.perturbation < 0.5))
        throw SpecError("perturbation amplitude must lie in [0, 0.5)");
    if (cfg.degree < 0 || cfg.degree > 6)
        throw SpecError("polynomial degree must lie in 0..6");

    int n = cfg.dimension;
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));

    for (int attempt = 0; attempt < 10; ++attempt) {
        SplitMix64 rng(cfg.seed +
                       0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(attempt));
        Expr eps = Expr::constant(cfg.perturbation);

        std::vector<std::vector<Expr>> g(static_cast<std::size_t>(n),
                                         std::vector<Expr>(static_cast<std::size_t>(n)));
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Expr s = random_entry(rng, n, cfg.degree, cfg.trig_terms);
                Expr gij = (i == j ? Expr::constant(1.0) : Expr::constant(0.0)) +
                           eps * s;
                g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = gij;
                g[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = gij;
            }
        std::vector<std::vector<Expr>> f(static_cast<std::size_t>(n),
                                         std::vector<Expr>(static_cast<std::size_t>(n),
                                                           Expr::constant(0.0)));
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                Expr k = eps * random_entry(rng, n, cfg.degree, cfg.trig_terms);
                f[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = k;
                f[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = -k;
            }

        ManifoldSpec spec;
        spec.dimension = n;
        spec.coordinates = names;
        spec.G.assign(static_cast<std::size_t>(n),
                      std::vector<std::string>(static_cast<std::size_t>(n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                spec.G[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    to_string(g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +
                                  f[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                              names);
        for (int i = 0; i < n; ++i)
            spec.pi.push_back(
                to_string(random_entry(rng, n, cfg.degree, cfg.trig_terms), names));
        {
            std::ostringstream note;
            note << "random manifold: seed=" << cfg.seed << " dim=" << n
                 << " eps=" << cfg.perturbation << " degree=" << cfg.degree
                 << (cfg.trig_terms ? " trig" : "") << " attempt=" << attempt;
            spec.note = note.str();
        }

        // validate non-degeneracy; a failed draw falls through to a retry
        try {
            ManifoldData probe(spec);
            return spec;
        } catch (const DegeneracyError&) {
            continue;
        }
    }
    throw SpecError("random manifold generation failed: the symmetric part "
                    "stayed degenerate after 10 attempts");
}

// ---------------------------------------------------------------------------
// ManifoldData

namespace {

TensorField parse_matrix_entry_field(const ManifoldSpec& spec,
                                     const ChartPtr& chart) {
    int n = spec.dimension;
    TensorField G(chart, 0, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::string& text =
                spec.G[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            try {
                G.component(i, j) = parse(text, chart->coordinate_names());
            } catch (const ParseError& err) {
                std::ostringstream os;
                os << "G[" << i + 1 << "][" << j + 1 << "]: " << err.what();
                throw SpecError(os.str());
            }
        }
    return G;
}

TensorField parse_pi_field(const ManifoldSpec& spec, const ChartPtr& chart) {
    int n = spec.dimension;
    TensorField pi(chart, 0, 1);
    for (int i = 0; i < n; ++i) {
        try {
            pi.component(i) =
                parse(spec.pi[static_cast<std::size_t>(i)],
                      chart->coordinate_names());
        } catch (const ParseError& err) {
            std::ostringstream os;
            os << "pi[" << i + 1 << "]: " << err.what();
            throw SpecError(os.str());
        }
    }
    return pi;
}

GeneralizedMetric build_metric(const ManifoldSpec& spec, const ChartPtr& chart) {
    return split_metric(parse_matrix_entry_field(spec, chart));
}

}  // namespace

ManifoldData::ManifoldData(const ManifoldSpec& spec, QSFamilyParams params)
    : chart_(Chart::make(spec.coordinates,
                         spec.box ? *spec.box
                                  : std::vector<std::array<double, 2>>{})),
      metric_(build_metric(spec, chart_)),
      structure_(compute_A(metric_)),
      gen_(compute_P(metric_, parse_pi_field(spec, chart_))),
      params_(params),
      spec_json_(manifold_spec_to_json(spec)) {}

const ConnectionCoefficients& ManifoldData::lc() {
    if (!lc_) lc_ = christoffel(metric_);
    return *lc_;
}

void ManifoldData::perturb_L1(int k, int i, int j, double delta) {
    if (L1_)
        throw SpecError("perturb_L1 must be called before the connection "
                        "is first used");
    perturbation_ = Perturbation{k, i, j, delta};
}

const ConnectionCoefficients& ManifoldData::L1() {
    if (!L1_) {
        L1_ = qs_connection(lc(), gen_, structure_, params_);
        if (perturbation_) {
            const Perturbation& p = *perturbation_;
            L1_->at(p.k, p.i, p.j) =
                L1_->at(p.k, p.i, p.j) + Expr::constant(p.delta);
        }
    }
    return *L1_;
}

const ConnectionCoefficients& ManifoldData::L2() {
    if (!L2_) L2_ = dual_connection(L1());
    return *L2_;
}

const ConnectionCoefficients& ManifoldData::L0() {
    if (!L0_) L0_ = symmetric_part_connection(L1(), L2());
    return *L0_;
}

const TorsionField& ManifoldData::T1() {
    if (!T1_) T1_ = torsion(L1(), metric_);
    return *T1_;
}

const TensorField& ManifoldData::nabla1_g() {
    if (!n1g_) n1g_ = covariant_derivative(L1(), metric_.g);
    return *n1g_;
}

const TensorField& ManifoldData::nabla1_F() {
    if (!n1F_) n1F_ = covariant_derivative(L1(), metric_.F);
    return *n1F_;
}

const TensorField& ManifoldData::nabla1_G() {
    if (!n1G_) n1G_ = covariant_derivative(L1(), metric_.G);
    return *n1G_;
}

const TensorField& ManifoldData::nabla1_A() {
    if (!n1A_) n1A_ = covariant_derivative(L1(), structure_.A);
    return *n1A_;
}

const TensorField& ManifoldData::nabla1_pi() {
    if (!n1pi_) n1pi_ = covariant_derivative(L1(), gen_.pi);
    return *n1pi_;
}

const TensorField& ManifoldData::nabla2_g() {
    if (!n2g_) n2g_ = covariant_derivative(L2(), metric_.g);
    return *n2g_;
}

const TensorField& ManifoldData::nabla2_F() {
    if (!n2F_) n2F_ = covariant_derivative(L2(), metric_.F);
    return *n2F_;
}

const TensorField& ManifoldData::nabla2_G() {
    if (!n2G_) n2G_ = covariant_derivative(L2(), metric_.G);
    return *n2G_;
}

const TensorField& ManifoldData::nabla2_A() {
    if (!n2A_) n2A_ = covariant_derivative(L2(), structure_.A);
    return *n2A_;
}

const TensorField& ManifoldData::dg_pi() {
    if (!dg_pi_) dg_pi_ = covariant_derivative(lc(), gen_.pi);
    return *dg_pi_;
}

const TensorField& ManifoldData::dg_A() {
    if (!dg_A_) dg_A_ = covariant_derivative(lc(), structure_.A);
    return *dg_A_;
}

const CurvatureField& ManifoldData::Rg() {
    if (!Rg_) Rg_ = curvature_standard(lc(), CurvatureTag::g);
    return *Rg_;
}

const CurvatureField& ManifoldData::R_op(int theta) {
    if (theta < 0 || theta > 5)
        throw ShapeError("curvature index must lie in 0..5");
    auto& slot = R_[static_cast<std::size_t>(theta)];
    if (!slot) {
        switch (theta) {
            case 0: slot = curvature_standard(L0(), CurvatureTag::r0); break;
            case 1: slot = curvature_standard(L1(), CurvatureTag::r1); break;
            case 2: slot = curvature_standard(L2(), CurvatureTag::r2); break;
            default: slot = curvature_mixed(L1(), L2(), theta); break;
        }
    }
    return *slot;
}

const AuxTensorSet& ManifoldData::aux() {
    if (!aux_) aux_ = aux_tensors(gen_, structure_, metric_, lc());
    return *aux_;
}

const TensorField& ManifoldData::piA() {
    if (!piA_) piA_ = one_form_through_map(gen_.pi, structure_.A);
    return *piA_;
}

const TensorField& ManifoldData::AA() {
    if (!AA_) AA_ = compose(structure_.A, structure_.A);
    return *AA_;
}

const std::vector<std::string>& ManifoldData::tensor_names() {
    static const std::vector<std::string> names = {
        "g",      "F",      "G",      "A",     "pi",    "P",      "Gamma",
        "L1",     "L2",     "L0",     "T",     "R_g",   "R0",     "R1",
        "R2",     "R3",     "R4",     "R5",    "alpha1", "alpha2", "beta1",
        "gamma1", "gamma2", "delta1", "M1",    "M2",    "V",      "N",
        "N1",     "dF",     "d1F"};
    return names;
}

TensorField ManifoldData::tensor_by_name(const std::string& name) {
    if (name == "g") return metric_.g;
    if (name == "F") return metric_.F;
    if (name == "G") return metric_.G;
    if (name == "A") return structure_.A;
    if (name == "pi") return gen_.pi;
    if (name == "P") return gen_.P;
    if (name == "Gamma") return lc().as_tensor_field();
    if (name == "L1") return L1().as_tensor_field();
    if (name == "L2") return L2().as_tensor_field();
    if (name == "L0") return L0().as_tensor_field();
    if (name == "T") return T1().T12;
    if (name == "R_g") return Rg().R;
    if (name == "R0") return R_op(0).R;
    if (name == "R1") return R_op(1).R;
    if (name == "R2") return R_op(2).R;
    if (name == "R3") return R_op(3).R;
    if (name == "R4") return R_op(4).R;
    if (name == "R5") return R_op(5).R;
    if (name == "alpha1") return aux().alpha1;
    if (name == "alpha2") return aux().alpha2;
    if (name == "beta1") return aux().beta1;
    if (name == "gamma1") return aux().gamma1;
    if (name == "gamma2") return aux().gamma2;
    if (name == "delta1") return aux().delta1;
    if (name == "M1") return m_tensor(gen_, structure_, metric_, lc(), 1);
    if (name == "M2") return m_tensor(gen_, structure_, metric_, lc(), 2);
    if (name == "V") return v_tensor(gen_, structure_, metric_, lc());
    if (name == "N") return nijenhuis_classical(structure_);
    if (name == "N1") return n1_tensor(structure_, nabla1_A());
    if (name == "dF") return exterior_derivative_F(metric_.F);
    if (name == "d1F") return d_connection_F(L1(), metric_.F);
    throw SpecError("unknown tensor name '" + name + "'");
}

}  // namespace qsnm
