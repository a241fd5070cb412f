// Seeded experiment runners. Each writes
//   <output_dir>/<experiment>-<hash>.jsonl   header, one record per trial, summary
//   <output_dir>/<experiment>-<hash>.csv     aggregates, '#' comment lines first
//   <output_dir>/<experiment>-<hash>.timing.csv   wall time per record
// and returns the aggregates. Trial t of dimension n draws its matrix from
// RngStream(master_seed, t).substream(n), so results do not depend on the
// thread count or on which other dimensions are in the run.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pivotlab/config.hpp"
#include "pivotlab/stability.hpp"
#include "pivotlab/stats.hpp"

namespace pivotlab {

struct RunFiles {
    std::filesystem::path jsonl;
    std::filesystem::path csv;
    std::filesystem::path timing;
    /// Extra tables (events: the singular-value table).
    std::vector<std::filesystem::path> extra;
};

struct RunCounts {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    std::uint64_t failures = 0;
};

struct GrowthSummary {
    std::size_t n = 0;
    int precision_bits = 53;
    RunCounts counts;
    double g_exact_median = 0.0;
    double g_exact_q1 = 0.0;
    double g_exact_q3 = 0.0;
    std::optional<double> g_fp_median;
    std::optional<double> backward_median;
    double pivot_match_fraction = 0.0;
};

struct GrowthSweepResult {
    RunFiles files;
    RunCounts counts;
    std::vector<GrowthSummary> rows;
};

/// Empirical P{g_exact >= n^t} for one n over the whole t grid.
struct TailEstimate {
    std::size_t n = 0;
    std::vector<double> t_grid;
    /// n^t rounded to nearest, for display; decisions use directed bounds.
    std::vector<double> thresholds;
    std::vector<std::uint64_t> counts;
    std::vector<double> estimates;
    /// Two-sided 95% Clopper-Pearson.
    std::vector<BinomialInterval> intervals;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    double median_g_exact = 0.0;
};

struct TailResult {
    RunFiles files;
    RunCounts counts;
    std::vector<TailEstimate> per_n;
};

struct EventRow {
    std::size_t n = 0;
    std::size_t r = 0;
    std::uint64_t trials = 0;
    double dist_threshold = 0.0;
    double norm_threshold = 0.0;
    std::uint64_t dist_count = 0;
    std::uint64_t norm_count = 0;
    BinomialInterval dist_ci;
    BinomialInterval norm_ci;
    /// n^(-2 beta) and 2 n^(-9 beta / 2).
    double bound_row_event = 0.0;
    double bound_norm_event = 0.0;
    [[nodiscard]] double dist_freq() const { return trials ? double(dist_count) / double(trials) : 0.0; }
    [[nodiscard]] double norm_freq() const { return trials ? double(norm_count) / double(trials) : 0.0; }
};

/// {s_{u-i}(M) <= c' i s / sqrt(u)} for a u x u Gaussian M (s_1 largest).
struct SingularValueRow {
    std::size_t u = 0;
    std::size_t i = 0;
    double s = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t count = 0;
    BinomialInterval ci;
    /// u^(i/2) s^(i^2/32).
    double bound = 0.0;
    [[nodiscard]] double freq() const { return trials ? double(count) / double(trials) : 0.0; }
};

struct EventResult {
    RunFiles files;
    RunCounts counts;
    std::vector<EventRow> rows;
    std::vector<SingularValueRow> sv_rows;
};

struct CompareRow {
    std::size_t n = 0;
    int precision_bits = 0;  // 0 in the exact field
    /// "gaussian" or "conditioned" (|fl(g_00)| <= conditioned_pivot).
    std::string ensemble;
    std::uint64_t trials = 0;
    std::uint64_t genp_failures = 0;
    std::uint64_t gepp_failures = 0;
    /// 50%, 90% and 99% quantiles of |H|_HS / |fl(A)|_HS.
    std::array<double, 3> gepp_quantiles{};
    std::array<double, 3> genp_quantiles{};
};

struct CompareResult {
    RunFiles files;
    RunCounts counts;
    std::vector<CompareRow> rows;
};

struct PolytopeRow {
    std::size_t n = 0;
    std::size_t r = 0;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    double mean_measure = 0.0;
    /// Trials whose upper measure bound is <= n^-2.
    std::uint64_t tail_count = 0;
    BinomialInterval tail_ci;
    /// n^-(n-r).
    double tail_bound = 0.0;
    /// Trials with dist < sqrt(pi/2) * (measure lower bound).
    std::uint64_t distance_violations = 0;
    std::uint64_t consistency_failures = 0;
    std::uint64_t consistency_checked = 0;
    [[nodiscard]] double tail_freq() const { return trials ? double(tail_count) / double(trials) : 0.0; }
};

struct PolytopeResult {
    RunFiles files;
    RunCounts counts;
    std::vector<PolytopeRow> rows;
};

struct ProbeRow {
    int precision_bits = 0;  // 0 in the exact field
    Probe2x2Result result;
    BinomialInterval small_pivot_ci;
};

struct ProbeResult {
    RunFiles files;
    RunCounts counts;
    std::vector<ProbeRow> rows;
};

/// One-sided level used for the polytope measure upper bound (three sigma).
inline constexpr double kMeasureUpperLevel = 0.99865;

GrowthSweepResult run_growth_sweep(const ExperimentConfig& cfg);
TailResult run_tail_estimate(const ExperimentConfig& cfg);
EventResult run_event_frequencies(const ExperimentConfig& cfg);
CompareResult compare_gepp_genp(const ExperimentConfig& cfg);
PolytopeResult run_polytope(const ExperimentConfig& cfg);
ProbeResult run_probe_2x2(const ExperimentConfig& cfg);

struct RunSummary {
    RunFiles files;
    RunCounts counts;
};

/// Validates, then dispatches on cfg.experiment. Throws ConfigError and
/// IoError.
RunSummary run_experiment(const ExperimentConfig& cfg);

/// Runs task(i) for i in [0, count) on `threads` workers and returns the
/// results in index order. The first exception thrown by a task is rethrown.
template <class R>
std::vector<R> ordered_parallel_map(std::size_t count, unsigned threads, const std::function<R(std::size_t)>& task);

/// Compile-time git description of the library build.
const char* git_describe();

}  // namespace pivotlab

#include "pivotlab/detail/parallel.hpp"
