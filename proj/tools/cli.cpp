#include "cli.hpp"

#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "pivotlab/config.hpp"
#include "pivotlab/experiment.hpp"
#include "pivotlab/matrix_io.hpp"
#include "pivotlab/serialize.hpp"

namespace pivotlab {

namespace {

struct FactorArgs {
    std::string input;
    std::string mode = "exact";
    int precision = 53;
    std::string variant = "gepp";
    bool json = false;
};

/// Flags shared by the experiment subcommands, kept as text and applied
/// through apply_override so lists use the same "a,b,c" syntax everywhere.
struct ExperimentArgs {
    std::string config;
    std::map<std::string, std::string> values;
    bool exact_field = false;
};

void add_experiment_flags(CLI::App* sub, ExperimentArgs& args) {
    sub->add_option("--config", args.config, "TOML configuration file");
    const std::pair<const char*, const char*> flags[] = {
        {"n", "n_values"},
        {"trials", "trials"},
        {"t", "t_grid"},
        {"seed", "master_seed"},
        {"threads", "thread_count"},
        {"output-dir", "output_dir"},
        {"precision", "precision_bits"},
        {"r", "r_values"},
        {"samples", "mc_samples"},
        {"eps", "eps_values"},
        {"beta", "beta"},
        {"c-prime", "c_prime"},
        {"kappa-max", "kappa_max"},
        {"conditioned-pivot", "conditioned_pivot"},
        {"sv-index", "sv_index"},
        {"sv-scales", "sv_scales"},
    };
    for (const auto& [flag, key] : flags) {
        const std::string k = key;
        sub->add_option_function<std::string>(
            std::string("--") + flag, [&args, k](const std::string& v) { args.values[k] = v; },
            "sets " + k);
    }
    sub->add_flag("--exact-field", args.exact_field, "run in the exact field (compare, probe2x2)");
}

ExperimentConfig build_config(ExperimentKind kind, const ExperimentArgs& args) {
    ExperimentConfig cfg = args.config.empty() ? ExperimentConfig{} : load_config(args.config);
    cfg.experiment = kind;
    for (const auto& [key, value] : args.values) apply_override(cfg, key, value);
    if (args.exact_field) cfg.exact_field = true;
    apply_environment(cfg);
    validate(cfg);
    return cfg;
}

bool is_identity(const std::vector<std::size_t>& order) {
    for (std::size_t i = 0; i < order.size(); ++i)
        if (order[i] != i) return false;
    return true;
}

template <class T>
void print_trace(std::ostream& out, const EliminationTrace<T>& tr, bool json) {
    if (json) {
        out << trace_to_json(tr) << '\n';
        return;
    }
    out << "field: " << tr.field << '\n';
    out << "variant: " << to_string(tr.variant) << '\n';
    out << "n: " << tr.n << '\n';
    if (is_identity(tr.row_order)) {
        out << "P = I\n";
    } else {
        out << "P: row q of PA is row";
        for (auto i : tr.row_order) out << ' ' << i;
        out << " of A\n";
    }
    out << "pivots:";
    for (auto i : tr.pivot_indices) out << ' ' << i;
    out << '\n';
    const Rational g = to_rational(tr.max_abs_intermediate) / to_rational(tr.max_abs_input);
    out << "growth " << to_string(g) << " (" << decimal_string(g) << ")\n";
    out << "last pivot zero: " << (tr.last_pivot_zero ? "yes" : "no") << '\n';
}

int run_factor(const FactorArgs& args) {
    const AnyMatrix any = read_matrix_file(args.input);
    const Matrix<Rational> a = std::visit([](const auto& m) { return to_rational(m); }, any);
    const Variant v = args.variant == "genp" ? Variant::no_pivoting : Variant::partial_pivoting;
    try {
        if (args.mode == "exact") {
            print_trace(std::cout, factor(a, v), args.json);
        } else {
            const FpConfig cfg{args.precision};
            validate(cfg);
            print_trace(std::cout, factor(round_matrix(a, cfg), v), args.json);
        }
    } catch (const ZeroPivot& e) {
        std::cerr << "elimination failed: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

int run_kind(ExperimentKind kind, const ExperimentArgs& args) {
    const ExperimentConfig cfg = build_config(kind, args);
    const RunSummary s = run_experiment(cfg);
    std::cout << "experiment " << to_string(cfg.experiment) << " config " << config_hash(cfg) << '\n';
    std::cout << "trials " << s.counts.trials << " successes " << s.counts.successes << " failures "
              << s.counts.failures << '\n';
    std::cout << "wrote " << s.files.jsonl.string() << '\n';
    std::cout << "wrote " << s.files.csv.string() << '\n';
    std::cout << "wrote " << s.files.timing.string() << '\n';
    for (const auto& p : s.files.extra) std::cout << "wrote " << p.string() << '\n';
    return kExitOk;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"pivotlab: Gaussian elimination growth and stability experiments"};
    app.require_subcommand(1);

    FactorArgs fargs;
    auto* fac = app.add_subcommand("factor", "factor one matrix from a file and print a trace summary");
    fac->add_option("--input", fargs.input, "matrix file (.csv decimal or .pvm lossless)")->required();
    fac->add_option("--mode", fargs.mode, "exact or emulated")->check(CLI::IsMember({"exact", "emulated"}));
    fac->add_option("--precision", fargs.precision, "significand bits for --mode emulated");
    fac->add_option("--variant", fargs.variant, "gepp or genp")->check(CLI::IsMember({"gepp", "genp"}));
    fac->add_flag("--json", fargs.json, "print the full trace as JSON");

    const std::pair<const char*, ExperimentKind> kinds[] = {
        {"sweep", ExperimentKind::growth_sweep},    {"tail", ExperimentKind::tail},
        {"polytope", ExperimentKind::polytope},      {"events", ExperimentKind::events},
        {"compare", ExperimentKind::compare_genp},   {"probe2x2", ExperimentKind::probe_2x2},
    };
    std::vector<ExperimentArgs> eargs(std::size(kinds));
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < std::size(kinds); ++i) {
        auto* sub = app.add_subcommand(kinds[i].first, std::string("run the ") + to_string(kinds[i].second) +
                                                           " experiment");
        add_experiment_flags(sub, eargs[i]);
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (fac->parsed()) return run_factor(fargs);
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i]->parsed()) return run_kind(kinds[i].second, eargs[i]);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const FormatError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace pivotlab
