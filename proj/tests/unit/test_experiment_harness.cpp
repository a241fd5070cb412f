#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "cli.hpp"
#include "json.hpp"
#include "pivotlab/config.hpp"
#include "pivotlab/experiment.hpp"

using namespace pivotlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("pivotlab-test-" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "pivotlab");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("TOML configuration parses every field") {
    const auto cfg = parse_config(R"(
experiment = "tail"
n_values = [10, 20]
trials = 7
master_seed = 99
precision_bits = [24]
t_grid = [0.25, 0.5]
thread_count = 2
eps_values = [0.2]
exact_field = true
sv_scales = [0.1]
)");
    CHECK(cfg.experiment == ExperimentKind::tail);
    CHECK(cfg.n_values == std::vector<std::size_t>{10, 20});
    CHECK(cfg.trials == 7);
    CHECK(cfg.master_seed == 99);
    CHECK(cfg.precision_bits == std::vector<int>{24});
    CHECK(cfg.thread_count == 2);
    CHECK(cfg.exact_field);
    CHECK(cfg.sv_scales == std::vector<double>{0.1});
}

TEST_CASE("config errors name the field and line") {
    try {
        parse_config("trials = 3\nbogus = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "bogus");
        CHECK(e.line() == 2);
    }
    try {
        parse_config("trials = 3\n\nn_values = \"ten\"\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "n_values");
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_config("trials = [\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_kind("nope"), ConfigError);
}

TEST_CASE("validation") {
    ExperimentConfig c;
    CHECK_NOTHROW(validate(c));
    c.trials = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.n_values = {1};
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.precision_bits = {1};
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.t_grid = {1.0, 0.5};
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.eps_values = {0.0};
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("overrides and environment") {
    ExperimentConfig c;
    apply_override(c, "n_values", "3,4");
    apply_override(c, "trials", "5");
    apply_override(c, "t_grid", "0.5,1,2");
    CHECK(c.n_values == std::vector<std::size_t>{3, 4});
    CHECK(c.trials == 5);
    CHECK(c.t_grid.size() == 3);
    CHECK_THROWS_AS(apply_override(c, "trials", "five"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "unknown", "1"), ConfigError);
    ::setenv("PIVOTLAB_THREADS", "3", 1);
    apply_environment(c);
    CHECK(c.thread_count == 3);
    ::setenv("PIVOTLAB_THREADS", "zero", 1);
    CHECK_THROWS_AS(apply_environment(c), ConfigError);
    ::unsetenv("PIVOTLAB_THREADS");
}

TEST_CASE("hash ignores output location and threads only") {
    ExperimentConfig a, b;
    b.output_dir = "/elsewhere";
    b.thread_count = 8;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.master_seed = 2;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.t_grid = {0.5, 1.5};
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("growth sweep writes header, trials, summary") {
    ExperimentConfig c;
    c.n_values = {3, 4};
    c.trials = 2;
    c.precision_bits = {24};
    c.output_dir = scratch("sweep").string();
    const auto res = run_growth_sweep(c);
    CHECK(res.counts.trials == 4);
    REQUIRE(res.rows.size() == 2);
    for (const auto& r : res.rows) CHECK(r.g_exact_median >= 1.0);

    std::ifstream in(res.files.jsonl);
    std::string line;
    std::vector<nlohmann::json> recs;
    while (std::getline(in, line)) recs.push_back(nlohmann::json::parse(line));
    REQUIRE(recs.size() == 6);
    CHECK(recs.front()["record"] == "header");
    CHECK(recs.front()["config_hash"] == config_hash(c));
    CHECK(recs[1]["record"] == "trial");
    CHECK(recs.back()["record"] == "summary");
    CHECK(recs.back()["trials"] == 4);
    const auto csv = slurp(res.files.csv);
    CHECK(csv.rfind("# experiment", 0) == 0);
    CHECK(fs::exists(res.files.timing));
}

TEST_CASE("outputs are byte-identical across thread counts") {
    ExperimentConfig c;
    c.n_values = {4, 6};
    c.trials = 6;
    c.precision_bits = {12};
    for (auto kind : {ExperimentKind::growth_sweep, ExperimentKind::polytope, ExperimentKind::compare_genp}) {
        c.experiment = kind;
        c.mc_samples = 500;
        c.thread_count = 1;
        c.output_dir = scratch("t1").string();
        const auto one = run_experiment(c);
        c.thread_count = 3;
        c.output_dir = scratch("t3").string();
        const auto three = run_experiment(c);
        CHECK(slurp(one.files.jsonl) == slurp(three.files.jsonl));
        CHECK(slurp(one.files.csv) == slurp(three.files.csv));
    }
}

TEST_CASE("tail estimates are nonincreasing in t") {
    ExperimentConfig c;
    c.experiment = ExperimentKind::tail;
    c.n_values = {8};
    c.trials = 30;
    c.t_grid = {0.0, 0.3, 0.6, 50.0};
    c.output_dir = scratch("tail").string();
    const auto r = run_tail_estimate(c);
    REQUIRE(r.per_n.size() == 1);
    const auto& e = r.per_n[0];
    CHECK(e.counts[0] == 30);  // g >= 1 always
    for (std::size_t k = 1; k < e.counts.size(); ++k) CHECK(e.counts[k] <= e.counts[k - 1]);
    CHECK(e.counts.back() == 0);
    CHECK(e.intervals.back().lower == 0.0);
}

TEST_CASE("events at r = n - 1 and the singular-value table") {
    ExperimentConfig c;
    c.experiment = ExperimentKind::events;
    c.n_values = {6};
    c.trials = 20;
    c.r_values = {5};
    c.sv_index = 2;
    c.output_dir = scratch("events").string();
    const auto r = run_event_frequencies(c);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].r == 5);
    CHECK(r.rows[0].trials == 20);
    CHECK(r.sv_rows.size() == c.sv_scales.size());
    CHECK(r.files.extra.size() == 1);
}

TEST_CASE("exact-field compare has zero backward error") {
    ExperimentConfig c;
    c.experiment = ExperimentKind::compare_genp;
    c.n_values = {5};
    c.trials = 10;
    c.exact_field = true;
    c.output_dir = scratch("cmp").string();
    const auto r = compare_gepp_genp(c);
    REQUIRE(r.rows.size() == 2);
    for (const auto& row : r.rows) {
        CHECK(row.precision_bits == 0);
        CHECK(row.gepp_quantiles[2] == 0.0);
        CHECK(row.genp_quantiles[2] == 0.0);
    }
}

TEST_CASE("CLI exit codes") {
    const auto dir = scratch("cli");
    fs::create_directories(dir);
    {
        std::ofstream m(dir / "id.csv");
        m << "1,0\n0,1\n";
    }
    CHECK(run_cli({"factor", "--input", (dir / "id.csv").string()}) == kExitOk);
    CHECK(run_cli({"factor", "--input", (dir / "missing.csv").string()}) == kExitIo);
    CHECK(run_cli({"sweep", "--trials", "0", "--output-dir", dir.string()}) == kExitConfig);
    CHECK(run_cli({"sweep", "--bogus"}) == kExitConfig);
    {
        std::ofstream t(dir / "bad.toml");
        t << "trials = 2\nwhat = 1\n";
    }
    CHECK(run_cli({"sweep", "--config", (dir / "bad.toml").string()}) == kExitConfig);
    CHECK(run_cli({"tail", "--n", "4", "--trials", "3", "--output-dir", (dir / "out").string()}) == kExitOk);
    CHECK(run_cli({"tail", "--n", "4", "--trials", "3", "--output-dir", "/proc/forbidden"}) == kExitIo);
}
