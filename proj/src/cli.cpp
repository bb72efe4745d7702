#include "qsnm/cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "qsnm/registry.hpp"

namespace qsnm {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

std::vector<double> parse_point_csv(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string item = text.substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (item.empty())
            throw SpecError("empty coordinate in --point");
        double v = 0.0;
        auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc() || res.ptr != item.data() + item.size())
            throw SpecError("cannot parse coordinate '" + item + "'");
        out.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string component_label(const std::string& name, const TensorField& t,
                            const std::vector<int>& idx) {
    std::string s = name;
    auto append_indices = [&](int from, int count, char open) {
        s += open;
        s += '{';
        for (int i = 0; i < count; ++i) {
            if (i) s += ',';
            s += std::to_string(idx[static_cast<std::size_t>(from + i)] + 1);
        }
        s += '}';
    };
    if (t.rank_up() > 0) append_indices(0, t.rank_up(), '^');
    if (t.rank_down() > 0) append_indices(t.rank_up(), t.rank_down(), '_');
    return s;
}

struct VerifyOptions {
    std::string manifold_path;
    bool use_random = false;
    int dim = 3;
    std::uint64_t seed = 0;
    int points = 50;
    double tol = 1e-9;
    std::string format = "table";
    std::string out_path;
    double a = 0.5;
    double b = -0.5;
    double eps = 0.1;
    int degree = 2;
    bool trig = false;
};

int do_verify(const VerifyOptions& opt) {
    if (opt.use_random == !opt.manifold_path.empty()) {
        std::cerr << "verify needs exactly one of --manifold PATH or --random"
                  << std::endl;
        return kExitUsage;
    }
    ManifoldSpec spec;
    if (opt.use_random) {
        RandomManifoldConfig cfg;
        cfg.seed = opt.seed;
        cfg.dimension = opt.dim;
        cfg.perturbation = opt.eps;
        cfg.degree = opt.degree;
        cfg.trig_terms = opt.trig;
        spec = random_manifold(cfg);
    } else {
        spec = read_manifold_file(opt.manifold_path);
    }

    ManifoldData data(spec, QSFamilyParams{opt.a, opt.b});
    SuiteReport report = run_registry(data, opt.points, opt.seed, opt.tol);
    std::string text = emit_report(report, opt.format == "json"
                                               ? ReportFormat::json
                                               : ReportFormat::table);
    std::cout << text;
    if (!opt.out_path.empty()) {
        std::ofstream out(opt.out_path, std::ios::binary);
        if (!out) {
            std::cerr << "cannot write report to '" << opt.out_path << "'"
                      << std::endl;
            return kExitIo;
        }
        out << text;
    }
    return report.all_pass() ? kExitOk : kExitCheckFailure;
}

int do_compute(const std::string& tensor, const std::string& manifold_path,
               const std::string& point_csv) {
    const auto& names = ManifoldData::tensor_names();
    if (std::find(names.begin(), names.end(), tensor) == names.end()) {
        std::cerr << "unknown tensor '" << tensor << "'; expected one of:";
        for (const auto& n : names) std::cerr << ' ' << n;
        std::cerr << std::endl;
        return kExitUsage;
    }
    ManifoldSpec spec = read_manifold_file(manifold_path);
    ManifoldData data(spec);
    std::vector<double> point = parse_point_csv(point_csv);
    if (static_cast<int>(point.size()) != data.chart()->dimension()) {
        std::cerr << "--point must list " << data.chart()->dimension()
                  << " coordinates" << std::endl;
        return kExitUsage;
    }
    TensorField field = data.tensor_by_name(tensor);
    NumericTensor values = field.eval(point);
    for (std::size_t flat = 0; flat < field.size(); ++flat) {
        auto idx = field.unflatten(flat);
        double v = values.values[flat];
        if (v == 0.0) v = 0.0;  // drop the sign of negative zero
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        std::cout << component_label(tensor, field, idx) << " = " << buf
                  << "\n";
    }
    return kExitOk;
}

int do_list() {
    const auto& checks = registry();
    for (std::size_t i = 0; i < checks.size(); ++i) {
        char line[256];
        std::snprintf(line, sizeof(line), "%3zu  %-32s %-10s %s\n", i + 1,
                      checks[i].name.c_str(),
                      checks[i].canonical_only ? "canonical" : "any (a,b)",
                      checks[i].anchor.c_str());
        std::cout << line;
    }
    std::cout << checks.size() << " checks" << std::endl;
    return kExitOk;
}

int do_gen(int dim, std::uint64_t seed, const std::string& out_path,
           double eps, int degree, bool trig) {
    RandomManifoldConfig cfg;
    cfg.seed = seed;
    cfg.dimension = dim;
    cfg.perturbation = eps;
    cfg.degree = degree;
    cfg.trig_terms = trig;
    ManifoldSpec spec = random_manifold(cfg);
    if (out_path.empty() || out_path == "-")
        std::cout << manifold_spec_to_json(spec);
    else
        write_manifold_file(spec, out_path);
    return kExitOk;
}

}  // namespace

int cli_main(std::vector<std::string> argv) {
    CLI::App app{"verification engine for the quarter-symmetric non-metric "
                 "connection on generalized Riemannian manifolds",
                 "qsnm"};
    app.require_subcommand(1);

    VerifyOptions vopt;
    auto* verify = app.add_subcommand(
        "verify", "run the identity registry against a manifold");
    verify->add_option("--manifold", vopt.manifold_path,
                       "manifold spec file (JSON)");
    verify->add_flag("--random", vopt.use_random,
                     "verify a generated random manifold");
    verify->add_option("--dim", vopt.dim, "dimension for --random")
        ->check(CLI::Range(2, 4));
    verify->add_option("--seed", vopt.seed,
                       "seed for generation and point sampling");
    verify->add_option("--points", vopt.points, "sample points per check")
        ->check(CLI::PositiveNumber);
    verify->add_option("--tol", vopt.tol, "residual tolerance");
    verify->add_option("--format", vopt.format, "report format")
        ->check(CLI::IsMember({"table", "json"}));
    verify->add_option("--out", vopt.out_path, "also write the report here");
    verify->add_option("--a", vopt.a, "family parameter a");
    verify->add_option("--b", vopt.b, "family parameter b");
    verify->add_option("--eps", vopt.eps, "perturbation amplitude for --random");
    verify->add_option("--degree", vopt.degree,
                       "polynomial degree for --random");
    verify->add_flag("--trig", vopt.trig, "mix trig terms into --random");

    std::string tensor_name, compute_manifold, point_csv;
    auto* compute = app.add_subcommand(
        "compute", "evaluate a named tensor at a point");
    compute->add_option("--tensor", tensor_name, "tensor name (see README)")
        ->required();
    compute->add_option("--manifold", compute_manifold, "manifold spec file")
        ->required();
    compute->add_option("--point", point_csv, "comma-separated coordinates")
        ->required();

    auto* list = app.add_subcommand("list", "print the identity catalog");

    int gen_dim = 3;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    double gen_eps = 0.1;
    int gen_degree = 2;
    bool gen_trig = false;
    auto* gen = app.add_subcommand("gen", "write a random manifold spec");
    gen->add_option("--dim", gen_dim, "dimension")->check(CLI::Range(2, 4));
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output path ('-' for stdout)");
    gen->add_option("--eps", gen_eps, "perturbation amplitude");
    gen->add_option("--degree", gen_degree, "polynomial degree");
    gen->add_flag("--trig", gen_trig, "mix trig terms into the entries");

    std::vector<const char*> cargv;
    cargv.reserve(argv.size());
    for (const std::string& s : argv) cargv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (verify->parsed()) return do_verify(vopt);
        if (compute->parsed())
            return do_compute(tensor_name, compute_manifold, point_csv);
        if (list->parsed()) return do_list();
        if (gen->parsed())
            return do_gen(gen_dim, gen_seed, gen_out, gen_eps, gen_degree,
                          gen_trig);
    } catch (const CLI::Error&) {
        return kExitUsage;
    } catch (const ParseError& err) {
        std::cerr << err.what() << std::endl;
        return kExitIo;
    } catch (const SpecError& err) {
        std::cerr << err.what() << std::endl;
        return kExitIo;
    } catch (const DegeneracyError& err) {
        std::cerr << err.what() << std::endl;
        return kExitIo;
    } catch (const DomainError& err) {
        std::cerr << err.what() << std::endl;
        return kExitIo;
    } catch (const ShapeError& err) {
        std::cerr << err.what() << std::endl;
        return kExitIo;
    } catch (const std::exception& err) {
        std::cerr << err.what() << std::endl;
        return kExitIo;
    }
    return kExitUsage;
}

}  // namespace qsnm
