// Experiment configuration: TOML file, command-line overrides, and the
// PIVOTLAB_THREADS environment variable, in increasing priority.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pivotlab {

enum class ExperimentKind { growth_sweep, tail, polytope, events, compare_genp, probe_2x2 };

const char* to_string(ExperimentKind k);
/// Throws ConfigError for unknown names.
ExperimentKind parse_experiment_kind(const std::string& s);

/// Malformed or invalid configuration. `line` is 0 when the problem is not
/// tied to a file line (command-line overrides, cross-field checks).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, std::size_t line, const std::string& message);
    [[nodiscard]] const std::string& field() const { return field_; }
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::string field_;
    std::size_t line_;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::growth_sweep;
    std::vector<std::size_t> n_values{50};
    std::uint64_t trials = 100;
    std::uint64_t master_seed = 1;
    std::vector<int> precision_bits{53};
    /// Constant c' of the small-singular-value tail check.
    double c_prime = 0.01;
    std::vector<double> t_grid{0.5, 1.0};
    std::string output_dir = "pivotlab-out";
    unsigned thread_count = 1;

    /// Steps r for the polytope and events experiments; empty means a default
    /// per experiment.
    std::vector<std::size_t> r_values;
    std::uint64_t mc_samples = 10000;
    std::vector<double> eps_values{0.1, 0.05};
    double beta = 2.0;
    double kappa_max = 100.0;
    /// compare_genp: the conditioned ensemble redraws g11 until
    /// |fl(g11)| <= this bound.
    double conditioned_pivot = 0.0009765625;  // 2^-10
    /// compare_genp and probe_2x2: run in the exact field instead of p bits.
    bool exact_field = false;
    std::size_t bareiss_max_n = 64;
    std::size_t forward_max_n = 64;
    std::size_t kappa_wide_max_n = 32;
    /// events: small-singular-value table for s_{u-i} of a u x u Gaussian
    /// (u = each n), i = sv_index, one row per scale s.
    std::size_t sv_index = 5;
    std::vector<double> sv_scales{0.5, 0.25};
};

/// Every field except output_dir and thread_count, one "key = value" per
/// line in a fixed order. Equal configs give equal text.
std::string canonical_text(const ExperimentConfig& cfg);
/// 64-bit FNV-1a of canonical_text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Parses TOML text. Unknown keys and type errors raise ConfigError with
/// the offending line.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
/// Throws std::ios_base::failure when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sets one field from its command-line spelling ("1,2,3" for lists).
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Applies PIVOTLAB_THREADS when set.
void apply_environment(ExperimentConfig& cfg);

/// Cross-field checks (trials >= 1, n >= 2, 2 <= p, ...). Throws ConfigError.
void validate(const ExperimentConfig& cfg);

}  // namespace pivotlab
