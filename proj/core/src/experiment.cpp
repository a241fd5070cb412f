#include "pivotlab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "json_util.hpp"
#include "pivotlab/certified.hpp"
#include "pivotlab/exact.hpp"
#include "pivotlab/matrix_io.hpp"
#include "pivotlab/polytope.hpp"
#include "pivotlab/rng.hpp"
#include "pivotlab/spectral.hpp"

#ifndef PIVOTLAB_GIT_DESCRIBE
#define PIVOTLAB_GIT_DESCRIBE "unknown"
#endif

namespace pivotlab {

const char* git_describe() { return PIVOTLAB_GIT_DESCRIBE; }

namespace {

using detail::Json;
using detail::real;

constexpr std::uint64_t kProbeChunk = 8192;
constexpr std::uint64_t kConditionedStream = 2;
constexpr std::uint64_t kSingularValueStream = 1;
constexpr std::uint64_t kMeasureStreamBase = 1000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string csv_real(double x) { return real_string(x); }

std::string join_csv(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    return out;
}

std::string failure_type(const std::exception& e) {
    if (dynamic_cast<const SingularInput*>(&e)) return "singular_input";
    if (dynamic_cast<const FpEliminationFailed*>(&e)) return "fp_elimination_failed";
    if (dynamic_cast<const ZeroPivot*>(&e)) return "zero_pivot";
    if (dynamic_cast<const NoConvergence*>(&e)) return "svd_no_convergence";
    if (dynamic_cast<const SingularBlock*>(&e)) return "singular_block";
    return "error";
}

Json failure_json(const std::exception& e) {
    Json j;
    j["type"] = failure_type(e);
    j["message"] = e.what();
    return j;
}

/// A trial's JSONL record, the timing label and the parsed payload.
template <class P>
struct Outcome {
    Json record;
    std::string label;
    double seconds = 0.0;
    bool ok = false;
    P payload{};
};

class RunWriter {
public:
    RunWriter(const ExperimentConfig& cfg, const std::vector<std::string>& fields) : cfg_(cfg) {
        hash_ = config_hash(cfg);
        const std::filesystem::path dir(cfg.output_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
        const std::string stem = std::string(to_string(cfg.experiment)) + "-" + hash_;
        files_.jsonl = dir / (stem + ".jsonl");
        files_.csv = dir / (stem + ".csv");
        files_.timing = dir / (stem + ".timing.csv");
        open(jsonl_, files_.jsonl);
        open(csv_, files_.csv);
        open(timing_, files_.timing);

        Json header;
        header["record"] = "header";
        header["experiment"] = to_string(cfg.experiment);
        header["config_hash"] = hash_;
        header["git_describe"] = git_describe();
        header["fields"] = fields;
        header["real_format"] = kRealFormatTag;
        header["config"] = canonical_text(cfg);
        jsonl_ << header.dump() << '\n';
        comment_block(csv_, fields);
        comment_block(timing_, fields);
        timing_ << "index,label,wall_seconds\n";
    }

    template <class P>
    void trial(std::size_t index, const Outcome<P>& o) {
        jsonl_ << o.record.dump() << '\n';
        timing_ << index << ',' << o.label << ',' << csv_real(o.seconds) << '\n';
        ++counts_.trials;
        (o.ok ? counts_.successes : counts_.failures) += 1;
    }

    /// A non-trial record (per-chunk aggregates).
    void record(const Json& j) { jsonl_ << j.dump() << '\n'; }

    void csv_line(const std::vector<std::string>& cells) { csv_ << join_csv(cells) << '\n'; }

    std::filesystem::path extra_table(const std::string& suffix, const std::vector<std::string>& fields,
                                      const std::vector<std::vector<std::string>>& rows) {
        const auto path = files_.jsonl.parent_path() /
                          (std::string(to_string(cfg_.experiment)) + "-" + hash_ + "." + suffix + ".csv");
        std::ofstream out;
        open(out, path);
        comment_block(out, fields);
        for (const auto& r : rows) out << join_csv(r) << '\n';
        if (!out) throw IoError("write failed: " + path.string());
        files_.extra.push_back(path);
        return path;
    }

    RunFiles finish() {
        Json s;
        s["record"] = "summary";
        s["config_hash"] = hash_;
        s["trials"] = counts_.trials;
        s["successes"] = counts_.successes;
        s["failures"] = counts_.failures;
        jsonl_ << s.dump() << '\n';
        jsonl_.flush();
        csv_.flush();
        timing_.flush();
        if (!jsonl_ || !csv_ || !timing_) throw IoError("write failed in " + cfg_.output_dir);
        return files_;
    }

    [[nodiscard]] const RunCounts& counts() const { return counts_; }
    [[nodiscard]] const std::string& hash() const { return hash_; }

private:
    static void open(std::ofstream& f, const std::filesystem::path& p) {
        f.open(p, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + p.string() + " for writing");
    }

    void comment_block(std::ostream& out, const std::vector<std::string>& fields) const {
        out << "# experiment=" << to_string(cfg_.experiment) << '\n';
        out << "# config_hash=" << hash_ << '\n';
        out << "# git_describe=" << git_describe() << '\n';
        out << "# fields=";
        for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? ";" : "") << fields[i];
        out << '\n';
        out << "# real_format=" << kRealFormatTag << '\n';
    }

    const ExperimentConfig& cfg_;
    std::string hash_;
    RunFiles files_;
    RunCounts counts_;
    std::ofstream jsonl_, csv_, timing_;
};

Json trial_record(const std::string& hash, std::uint64_t stream_id) {
    Json j;
    j["record"] = "trial";
    j["config_hash"] = hash;
    j["stream_id"] = stream_id;
    return j;
}

/// fl_p of a Gaussian matrix, as exact rationals.
Matrix<Rational> draw_matrix(std::uint64_t seed, std::uint64_t trial, std::size_t n, FpConfig cfg) {
    RngStream s = RngStream(seed, trial).substream(n);
    return exact_shadow(sample_gaussian_matrix(n, n, s, cfg));
}

std::vector<std::string> emulated_tags(const std::vector<int>& precisions, bool with_exact) {
    std::vector<std::string> tags;
    if (with_exact) tags.emplace_back("exact");
    for (int p : precisions) tags.push_back("emulated(" + std::to_string(p) + ")");
    return tags;
}

/// Steps examined for an n when r_values is empty.
std::vector<std::size_t> steps_for(const ExperimentConfig& cfg, std::size_t n) {
    std::vector<std::size_t> out;
    if (cfg.r_values.empty()) {
        out.push_back(std::max<std::size_t>(1, n / 2));
        return out;
    }
    for (auto r : cfg.r_values)
        if (r >= 1 && r <= n - 1) out.push_back(r);
    return out;
}

std::vector<Rational> ones(std::size_t n) { return std::vector<Rational>(n, Rational(1)); }

// ---- tail thresholds ----

bool is_integer_exponent(double t) { return t >= 0 && t == std::floor(t) && t < 4096; }

/// g >= n^t decided exactly (integer t) or with MPFR enclosures of n^t.
bool exceeds_exactly(const Rational& g, std::size_t n, double t) {
    if (is_integer_exponent(t)) {
        mpz_class p;
        mpz_ui_pow_ui(p.get_mpz_t(), n, static_cast<unsigned long>(t));
        return g >= Rational(p);
    }
    for (mpfr_prec_t prec = 128; prec <= 8192; prec *= 2) {
        mpfr_t base, ex, lo, hi;
        mpfr_inits2(prec, base, ex, lo, hi, static_cast<mpfr_ptr>(nullptr));
        mpfr_set_ui(base, n, MPFR_RNDN);
        mpfr_set_d(ex, t, MPFR_RNDN);
        const int exact = mpfr_pow(lo, base, ex, MPFR_RNDD);
        mpfr_pow(hi, base, ex, MPFR_RNDU);
        std::optional<bool> decided;
        if (exact == 0) decided = mpfr_cmp_q(lo, g.get_mpq_t()) <= 0;
        else if (mpfr_cmp_q(hi, g.get_mpq_t()) <= 0) decided = true;
        else if (mpfr_cmp_q(lo, g.get_mpq_t()) > 0) decided = false;
        mpfr_clears(base, ex, lo, hi, static_cast<mpfr_ptr>(nullptr));
        if (decided) return *decided;
    }
    throw std::runtime_error("could not separate the growth ratio from n^t");
}

struct ThresholdBounds {
    double lo = 0.0;
    double nearest = 0.0;
    double hi = 0.0;
};

ThresholdBounds threshold_bounds(std::size_t n, double t) {
    mpfr_t base, ex, v;
    mpfr_inits2(64, base, ex, v, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_ui(base, n, MPFR_RNDN);
    mpfr_set_d(ex, t, MPFR_RNDN);
    ThresholdBounds b;
    mpfr_pow(v, base, ex, MPFR_RNDD);
    b.lo = mpfr_get_d(v, MPFR_RNDD);
    mpfr_pow(v, base, ex, MPFR_RNDU);
    b.hi = mpfr_get_d(v, MPFR_RNDU);
    mpfr_pow(v, base, ex, MPFR_RNDN);
    b.nearest = mpfr_get_d(v, MPFR_RNDN);
    mpfr_clears(base, ex, v, static_cast<mpfr_ptr>(nullptr));
    return b;
}

}  // namespace

// ---------------------------------------------------------------- growth sweep

GrowthSweepResult run_growth_sweep(const ExperimentConfig& cfg) {
    validate(cfg);
    struct Payload {
        bool report = false;
        bool fp_ok = false;
        double g_exact = 0.0;
        std::optional<double> g_fp;
        std::optional<double> backward;
        bool pivot_match = false;
    };
    const std::size_t np = cfg.precision_bits.size();
    const std::size_t per_n = np * cfg.trials;
    const std::size_t total = cfg.n_values.size() * per_n;
    RunWriter w(cfg, emulated_tags(cfg.precision_bits, true));
    ReportOptions opts;
    opts.bareiss_max_n = cfg.bareiss_max_n;
    opts.forward_max_n = cfg.forward_max_n;
    opts.kappa_wide_max_n = cfg.kappa_wide_max_n;

    const std::string hash = w.hash();
    std::function<Outcome<Payload>(std::size_t)> task = [&](std::size_t idx) {
        const std::size_t n = cfg.n_values[idx / per_n];
        const int p = cfg.precision_bits[(idx % per_n) / cfg.trials];
        const std::uint64_t t = idx % cfg.trials;
        Outcome<Payload> o;
        o.label = "n=" + std::to_string(n) + " p=" + std::to_string(p) + " t=" + std::to_string(t);
        const auto start = Clock::now();
        o.record = trial_record(hash, t);
        o.record["n"] = n;
        o.record["precision_bits"] = p;
        try {
            const FpConfig fc{p};
            const auto a = draw_matrix(cfg.master_seed, t, n, fc);
            const auto rep = stability_report(a, ones(n), fc, opts);
            o.payload.report = true;
            o.payload.fp_ok = rep.fp_succeeded;
            o.payload.g_exact = rep.g_exact;
            o.payload.g_fp = rep.g_fp;
            o.payload.backward = rep.backward_norm;
            o.payload.pivot_match = rep.pivot_match;
            o.ok = rep.fp_succeeded;
            o.record["status"] = o.ok ? "ok" : "failure";
            if (!o.ok) {
                Json f;
                f["type"] = "fp_elimination_failed";
                f["step"] = rep.fp_failure_step ? Json(*rep.fp_failure_step) : Json(nullptr);
                o.record["failure"] = f;
            }
            o.record["report"] = detail::report_json(rep);
        } catch (const std::exception& e) {
            o.record["status"] = "failure";
            o.record["failure"] = failure_json(e);
        }
        o.seconds = seconds_since(start);
        return o;
    };
    const auto outcomes = ordered_parallel_map(total, cfg.thread_count, task);

    GrowthSweepResult res;
    w.csv_line({"n", "precision_bits", "trials", "successes", "failures", "g_exact_median", "g_exact_q1",
                "g_exact_q3", "g_fp_median", "backward_hs_median", "pivot_match_fraction"});
    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        for (std::size_t pi = 0; pi < np; ++pi) {
            GrowthSummary s;
            s.n = cfg.n_values[ni];
            s.precision_bits = cfg.precision_bits[pi];
            std::vector<double> g, gfp, bwd;
            std::uint64_t match = 0;
            for (std::uint64_t t = 0; t < cfg.trials; ++t) {
                const std::size_t idx = ni * per_n + pi * cfg.trials + t;
                const auto& o = outcomes[idx];
                w.trial(idx, o);
                ++s.counts.trials;
                (o.ok ? s.counts.successes : s.counts.failures) += 1;
                if (!o.payload.report) continue;
                g.push_back(o.payload.g_exact);
                if (o.payload.g_fp) gfp.push_back(*o.payload.g_fp);
                if (o.payload.backward) bwd.push_back(*o.payload.backward);
                match += o.payload.pivot_match ? 1 : 0;
            }
            if (!g.empty()) {
                s.g_exact_median = median(g);
                s.g_exact_q1 = quantile(g, 0.25);
                s.g_exact_q3 = quantile(g, 0.75);
                s.pivot_match_fraction = double(match) / double(g.size());
            }
            if (!gfp.empty()) s.g_fp_median = median(gfp);
            if (!bwd.empty()) s.backward_median = median(bwd);
            auto opt = [](const std::optional<double>& x) { return x ? csv_real(*x) : std::string(); };
            w.csv_line({std::to_string(s.n), std::to_string(s.precision_bits), std::to_string(s.counts.trials),
                        std::to_string(s.counts.successes), std::to_string(s.counts.failures),
                        csv_real(s.g_exact_median), csv_real(s.g_exact_q1), csv_real(s.g_exact_q3),
                        opt(s.g_fp_median), opt(s.backward_median), csv_real(s.pivot_match_fraction)});
            res.rows.push_back(s);
        }
    }
    res.files = w.finish();
    res.counts = w.counts();
    return res;
}

// ---------------------------------------------------------------- tail

TailResult run_tail_estimate(const ExperimentConfig& cfg) {
    validate(cfg);
    if (cfg.t_grid.empty()) throw ConfigError("t_grid", 0, "tail experiment needs a nonempty grid");
    struct Payload {
        double g = 0.0;
        std::vector<bool> exceeds;
    };
    const FpConfig fc{cfg.precision_bits.front()};
    const std::size_t total = cfg.n_values.size() * cfg.trials;
    RunWriter w(cfg, {"exact", "emulated(" + std::to_string(fc.precision_bits) + ")"});
    const std::string hash = w.hash();

    std::vector<std::vector<ThresholdBounds>> bounds;
    for (auto n : cfg.n_values) {
        std::vector<ThresholdBounds> row;
        for (double t : cfg.t_grid) row.push_back(threshold_bounds(n, t));
        bounds.push_back(std::move(row));
    }

    std::function<Outcome<Payload>(std::size_t)> task = [&](std::size_t idx) {
        const std::size_t ni = idx / cfg.trials;
        const std::size_t n = cfg.n_values[ni];
        const std::uint64_t t = idx % cfg.trials;
        Outcome<Payload> o;
        o.label = "n=" + std::to_string(n) + " t=" + std::to_string(t);
        const auto start = Clock::now();
        o.record = trial_record(hash, t);
        o.record["n"] = n;
        try {
            const auto a = draw_matrix(cfg.master_seed, t, n, fc);
            const auto c = certified_gepp(a);
            std::optional<Rational> exact = c.exact_growth;
            Json decisions = Json::array();
            for (std::size_t k = 0; k < cfg.t_grid.size(); ++k) {
                const auto& b = bounds[ni][k];
                bool hit = false;
                std::string by = "ball";
                if (exact) {
                    hit = exceeds_exactly(*exact, n, cfg.t_grid[k]);
                    by = "exact";
                } else if (c.growth_lower >= b.hi) {
                    hit = true;
                } else if (c.growth_upper < b.lo) {
                    hit = false;
                } else {
                    exact = exact_gepp_summary(a).growth;
                    hit = exceeds_exactly(*exact, n, cfg.t_grid[k]);
                    by = "exact";
                }
                o.payload.exceeds.push_back(hit);
                decisions.push_back({{"t", real(cfg.t_grid[k])}, {"exceeds", hit}, {"decided_by", by}});
            }
            o.payload.g = exact ? exact->get_d() : c.growth_estimate;
            o.ok = true;
            o.record["status"] = "ok";
            o.record["g_exact"] = real(o.payload.g);
            o.record["g_exact_lower"] = real(c.growth_lower);
            o.record["g_exact_upper"] = real(c.growth_upper);
            o.record["g_exact_method"] = c.exact_growth ? std::string("bareiss")
                                                         : "ball" + std::to_string(c.precision_used);
            o.record["pivot_indices"] = c.pivot_indices;
            o.record["tail"] = std::move(decisions);
        } catch (const ZeroPivot& e) {
            o.record["status"] = "failure";
            o.record["failure"] = {{"type", "singular_input"}, {"message", e.what()}};
        } catch (const std::exception& e) {
            o.record["status"] = "failure";
            o.record["failure"] = failure_json(e);
        }
        o.seconds = seconds_since(start);
        return o;
    };
    const auto outcomes = ordered_parallel_map(total, cfg.thread_count, task);

    TailResult res;
    w.csv_line({"n", "t", "threshold", "trials", "count", "estimate", "ci_lower", "ci_upper", "median_g_exact"});
    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        TailEstimate est;
        est.n = cfg.n_values[ni];
        est.t_grid = cfg.t_grid;
        est.counts.assign(cfg.t_grid.size(), 0);
        std::vector<double> g;
        for (std::uint64_t t = 0; t < cfg.trials; ++t) {
            const std::size_t idx = ni * cfg.trials + t;
            const auto& o = outcomes[idx];
            w.trial(idx, o);
            if (!o.ok) {
                ++est.failures;
                continue;
            }
            ++est.trials;
            g.push_back(o.payload.g);
            for (std::size_t k = 0; k < cfg.t_grid.size(); ++k) est.counts[k] += o.payload.exceeds[k] ? 1 : 0;
        }
        if (!g.empty()) est.median_g_exact = median(g);
        for (std::size_t k = 0; k < cfg.t_grid.size(); ++k) {
            est.thresholds.push_back(bounds[ni][k].nearest);
            const double e = est.trials ? double(est.counts[k]) / double(est.trials) : 0.0;
            est.estimates.push_back(e);
            est.intervals.push_back(est.trials ? clopper_pearson(est.counts[k], est.trials) : BinomialInterval{});
            w.csv_line({std::to_string(est.n), csv_real(cfg.t_grid[k]), csv_real(est.thresholds[k]),
                        std::to_string(est.trials), std::to_string(est.counts[k]), csv_real(e),
                        csv_real(est.intervals[k].lower), csv_real(est.intervals[k].upper),
                        csv_real(est.median_g_exact)});
        }
        res.per_n.push_back(std::move(est));
    }
    res.files = w.finish();
    res.counts = w.counts();
    return res;
}

// ---------------------------------------------------------------- events

EventResult run_event_frequencies(const ExperimentConfig& cfg) {
    validate(cfg);
    struct Payload {
        std::vector<bool> dist_hit, norm_hit;
        std::vector<bool> sv_hit;
        bool sv_done = false;
    };
    const std::size_t total = cfg.n_values.size() * cfg.trials;
    RunWriter w(cfg, {"exact", "emulated(53)", "binary64"});
    const std::string hash = w.hash();
    const FpConfig fc{53};
    const double beta = cfg.beta;

    auto dist_threshold = [&](std::size_t n, std::size_t r) {
        return std::sqrt(2.0 / M_PI) *
               std::pow(double(n), -4.0 * (1.0 + beta / double(n - r)));
    };
    auto norm_threshold = [&](std::size_t n) {
        return std::sqrt(double(n)) + 3.0 * std::sqrt(beta * std::log(double(n)));
    };
    auto sv_applies = [&](std::size_t u) { return cfg.sv_index >= 1 && cfg.sv_index + 1 <= u; };

    std::function<Outcome<Payload>(std::size_t)> task = [&](std::size_t idx) {
        const std::size_t n = cfg.n_values[idx / cfg.trials];
        const std::uint64_t t = idx % cfg.trials;
        Outcome<Payload> o;
        o.label = "n=" + std::to_string(n) + " t=" + std::to_string(t);
        const auto start = Clock::now();
        o.record = trial_record(hash, t);
        o.record["n"] = n;
        try {
            const auto a = draw_matrix(cfg.master_seed, t, n, fc);
            const auto pivots = certified_gepp(a).pivot_indices;
            Json steps = Json::array();
            for (auto r : steps_for(cfg, n)) {
                // Row i_r restricted to [0, r) against the span of the earlier
                // pivot rows restricted the same way.
                std::vector<Rational> v(a.row(pivots[r - 1]).begin(), a.row(pivots[r - 1]).begin() + r);
                Matrix<Rational> prev(r - 1, r);
                for (std::size_t s = 0; s + 1 < r; ++s)
                    for (std::size_t j = 0; j < r; ++j) prev(s, j) = a(pivots[s], j);
                const double dist = dist_to_rowspan(v, prev);
                Rational sq = 0;
                for (const auto& x : a.row(pivots[r - 1])) sq += x * x;
                const double norm = std::sqrt(sq.get_d());
                const bool dh = dist < dist_threshold(n, r);
                const bool nh = norm > norm_threshold(n);
                o.payload.dist_hit.push_back(dh);
                o.payload.norm_hit.push_back(nh);
                steps.push_back({{"r", r}, {"pivot_row", pivots[r - 1]}, {"dist", real(dist)},
                                 {"row_norm", real(norm)}, {"dist_event", dh}, {"norm_event", nh}});
            }
            o.record["steps"] = std::move(steps);
            if (sv_applies(n)) {
                RngStream ms = RngStream(cfg.master_seed, t).substream(n).substream(kSingularValueStream);
                const auto m = sample_gaussian_doubles(n, n, ms);
                const auto sv = singular_values(m);
                const double s_val = sv[n - cfg.sv_index - 1];  // s_{u-i}, 1-based from the top
                Json svj = Json::array();
                for (double s : cfg.sv_scales) {
                    const bool hit = s_val <= cfg.c_prime * double(cfg.sv_index) * s / std::sqrt(double(n));
                    o.payload.sv_hit.push_back(hit);
                    svj.push_back({{"s", real(s)}, {"event", hit}});
                }
                o.payload.sv_done = true;
                o.record["s_u_minus_i"] = real(s_val);
                o.record["sv_events"] = std::move(svj);
            }
            o.ok = true;
            o.record["status"] = "ok";
        } catch (const ZeroPivot& e) {
            o.record["status"] = "failure";
            o.record["failure"] = {{"type", "singular_input"}, {"message", e.what()}};
        } catch (const std::exception& e) {
            o.record["status"] = "failure";
            o.record["failure"] = failure_json(e);
        }
        o.seconds = seconds_since(start);
        return o;
    };
    const auto outcomes = ordered_parallel_map(total, cfg.thread_count, task);

    EventResult res;
    w.csv_line({"n", "r", "beta", "trials", "dist_threshold", "dist_count", "dist_freq", "dist_ci_lower",
                "dist_ci_upper", "norm_threshold", "norm_count", "norm_freq", "norm_ci_lower", "norm_ci_upper",
                "bound_row_event", "bound_norm_event"});
    std::vector<std::vector<std::string>> sv_table;
    sv_table.push_back({"u", "i", "s", "c_prime", "trials", "count", "freq", "ci_lower", "ci_upper", "bound"});
    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        const std::size_t n = cfg.n_values[ni];
        const auto steps = steps_for(cfg, n);
        std::vector<EventRow> rows(steps.size());
        std::vector<SingularValueRow> svr(sv_applies(n) ? cfg.sv_scales.size() : 0);
        for (std::uint64_t t = 0; t < cfg.trials; ++t) {
            const std::size_t idx = ni * cfg.trials + t;
            const auto& o = outcomes[idx];
            w.trial(idx, o);
            if (!o.ok) continue;
            for (std::size_t k = 0; k < steps.size(); ++k) {
                ++rows[k].trials;
                rows[k].dist_count += o.payload.dist_hit[k] ? 1 : 0;
                rows[k].norm_count += o.payload.norm_hit[k] ? 1 : 0;
            }
            if (o.payload.sv_done)
                for (std::size_t k = 0; k < svr.size(); ++k) {
                    ++svr[k].trials;
                    svr[k].count += o.payload.sv_hit[k] ? 1 : 0;
                }
        }
        for (std::size_t k = 0; k < steps.size(); ++k) {
            auto& row = rows[k];
            row.n = n;
            row.r = steps[k];
            row.dist_threshold = dist_threshold(n, row.r);
            row.norm_threshold = norm_threshold(n);
            row.bound_row_event = std::pow(double(n), -2.0 * beta);
            row.bound_norm_event = 2.0 * std::pow(double(n), -4.5 * beta);
            if (row.trials) {
                row.dist_ci = clopper_pearson(row.dist_count, row.trials);
                row.norm_ci = clopper_pearson(row.norm_count, row.trials);
            }
            w.csv_line({std::to_string(n), std::to_string(row.r), csv_real(beta), std::to_string(row.trials),
                        csv_real(row.dist_threshold), std::to_string(row.dist_count), csv_real(row.dist_freq()),
                        csv_real(row.dist_ci.lower), csv_real(row.dist_ci.upper), csv_real(row.norm_threshold),
                        std::to_string(row.norm_count), csv_real(row.norm_freq()), csv_real(row.norm_ci.lower),
                        csv_real(row.norm_ci.upper), csv_real(row.bound_row_event), csv_real(row.bound_norm_event)});
            res.rows.push_back(row);
        }
        for (std::size_t k = 0; k < svr.size(); ++k) {
            auto& row = svr[k];
            row.u = n;
            row.i = cfg.sv_index;
            row.s = cfg.sv_scales[k];
            row.bound = std::pow(double(n), double(row.i) / 2.0) * std::pow(row.s, double(row.i * row.i) / 32.0);
            if (row.trials) row.ci = clopper_pearson(row.count, row.trials);
            sv_table.push_back({std::to_string(row.u), std::to_string(row.i), csv_real(row.s), csv_real(cfg.c_prime),
                                std::to_string(row.trials), std::to_string(row.count), csv_real(row.freq()),
                                csv_real(row.ci.lower), csv_real(row.ci.upper), csv_real(row.bound)});
            res.sv_rows.push_back(row);
        }
    }
    w.extra_table("singular_values", {"binary64"}, sv_table);
    res.files = w.finish();
    res.counts = w.counts();
    return res;
}

// ---------------------------------------------------------------- GENP vs GEPP

CompareResult compare_gepp_genp(const ExperimentConfig& cfg) {
    validate(cfg);
    struct Side {
        std::optional<double> gepp, genp;
    };
    struct Payload {
        std::array<Side, 2> ens;  // gaussian, conditioned
    };
    const std::vector<int> precisions = cfg.exact_field ? std::vector<int>{0} : cfg.precision_bits;
    const std::size_t np = precisions.size();
    const std::size_t per_n = np * cfg.trials;
    const std::size_t total = cfg.n_values.size() * per_n;
    RunWriter w(cfg, cfg.exact_field ? std::vector<std::string>{"exact"} : emulated_tags(precisions, false));
    const std::string hash = w.hash();
    static const char* const kEnsembles[2] = {"gaussian", "conditioned"};

    std::function<Outcome<Payload>(std::size_t)> task = [&](std::size_t idx) {
        const std::size_t n = cfg.n_values[idx / per_n];
        const int p = precisions[(idx % per_n) / cfg.trials];
        const std::uint64_t t = idx % cfg.trials;
        Outcome<Payload> o;
        o.label = "n=" + std::to_string(n) + " p=" + std::to_string(p) + " t=" + std::to_string(t);
        const auto start = Clock::now();
        o.record = trial_record(hash, t);
        o.record["n"] = n;
        o.record["precision_bits"] = p;
        // The draws are binary64; the exact field works on them unrounded.
        const FpConfig draw_cfg{p == 0 ? 53 : p};
        Json ens = Json::array();
        bool any_failure = false;
        try {
            Matrix<Rational> base = draw_matrix(cfg.master_seed, t, n, draw_cfg);
            for (int e = 0; e < 2; ++e) {
                Matrix<Rational> a = base;
                Json ej;
                ej["ensemble"] = kEnsembles[e];
                if (e == 1) {
                    RngStream cs = RngStream(cfg.master_seed, t).substream(n).substream(kConditionedStream);
                    std::uint64_t draws = 0;
                    for (;;) {
                        ++draws;
                        const Rational g = round_to_precision(rational_from_double(cs.next_gaussian()), draw_cfg)
                                               .to_rational();
                        if (abs(g) <= rational_from_double(cfg.conditioned_pivot)) {
                            a(0, 0) = g;
                            break;
                        }
                    }
                    ej["redraws"] = draws;
                }
                for (Variant v : {Variant::partial_pivoting, Variant::no_pivoting}) {
                    const char* key = v == Variant::partial_pivoting ? "gepp" : "genp";
                    std::optional<double>& slot = v == Variant::partial_pivoting ? o.payload.ens[e].gepp
                                                                                 : o.payload.ens[e].genp;
                    try {
                        double h = 0.0;
                        double scale = 0.0;
                        if (p == 0) {
                            const auto tr = factor(a, v);
                            h = backward_error_of(a, tr).h_hs;
                            scale = hs_norm(a).approx;
                        } else {
                            const auto fla = round_matrix(a, FpConfig{p});
                            try {
                                const auto tr = factor(fla, v);
                                h = backward_error_of(fla, tr).h_hs;
                            } catch (const ZeroPivot& z) {
                                throw FpEliminationFailed(z.step());
                            }
                            scale = to_double(hs_norm(fla));
                        }
                        slot = h / scale;
                        ej[key] = {{"status", "ok"}, {"relative_backward_error", real(*slot)}};
                    } catch (const std::exception& ex) {
                        any_failure = true;
                        ej[key] = {{"status", "failure"}, {"failure", failure_json(ex)}};
                    }
                }
                ens.push_back(std::move(ej));
            }
            o.ok = !any_failure;
            o.record["status"] = o.ok ? "ok" : "failure";
            if (any_failure) o.record["failure"] = {{"type", "elimination_failed"}, {"message", "see ensembles"}};
            o.record["ensembles"] = std::move(ens);
        } catch (const std::exception& ex) {
            o.record["status"] = "failure";
            o.record["failure"] = failure_json(ex);
        }
        o.seconds = seconds_since(start);
        return o;
    };
    const auto outcomes = ordered_parallel_map(total, cfg.thread_count, task);

    CompareResult res;
    w.csv_line({"n", "precision_bits", "ensemble", "trials", "gepp_failures", "genp_failures", "gepp_q50", "gepp_q90",
                "gepp_q99", "genp_q50", "genp_q90", "genp_q99"});
    const double qs[3] = {0.5, 0.9, 0.99};
    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        for (std::size_t pi = 0; pi < np; ++pi) {
            std::array<CompareRow, 2> rows;
            std::array<std::vector<double>, 2> gepp, genp;
            for (std::uint64_t t = 0; t < cfg.trials; ++t) {
                const std::size_t idx = ni * per_n + pi * cfg.trials + t;
                const auto& o = outcomes[idx];
                w.trial(idx, o);
                for (int e = 0; e < 2; ++e) {
                    ++rows[e].trials;
                    const auto& side = o.payload.ens[e];
                    if (side.gepp) gepp[e].push_back(*side.gepp);
                    else ++rows[e].gepp_failures;
                    if (side.genp) genp[e].push_back(*side.genp);
                    else ++rows[e].genp_failures;
                }
            }
            for (int e = 0; e < 2; ++e) {
                auto& row = rows[e];
                row.n = cfg.n_values[ni];
                row.precision_bits = precisions[pi];
                row.ensemble = kEnsembles[e];
                for (int k = 0; k < 3; ++k) {
                    row.gepp_quantiles[k] = gepp[e].empty() ? NAN : quantile(gepp[e], qs[k]);
                    row.genp_quantiles[k] = genp[e].empty() ? NAN : quantile(genp[e], qs[k]);
                }
                w.csv_line({std::to_string(row.n), std::to_string(row.precision_bits), row.ensemble,
                            std::to_string(row.trials), std::to_string(row.gepp_failures),
                            std::to_string(row.genp_failures), csv_real(row.gepp_quantiles[0]),
                            csv_real(row.gepp_quantiles[1]), csv_real(row.gepp_quantiles[2]),
                            csv_real(row.genp_quantiles[0]), csv_real(row.genp_quantiles[1]),
                            csv_real(row.genp_quantiles[2])});
                res.rows.push_back(row);
            }
        }
    }
    res.files = w.finish();
    res.counts = w.counts();
    return res;
}

// ---------------------------------------------------------------- polytope

PolytopeResult run_polytope(const ExperimentConfig& cfg) {
    validate(cfg);
    struct StepResult {
        double measure = 0.0;
        bool tail = false;
        bool distance_ok = true;
        bool consistency_ok = true;
    };
    struct Payload {
        std::vector<StepResult> steps;
    };
    const std::size_t total = cfg.n_values.size() * cfg.trials;
    RunWriter w(cfg, {"exact", "emulated(53)", "binary64"});
    const std::string hash = w.hash();
    const FpConfig fc{53};

    std::function<Outcome<Payload>(std::size_t)> task = [&](std::size_t idx) {
        const std::size_t n = cfg.n_values[idx / cfg.trials];
        const std::uint64_t t = idx % cfg.trials;
        Outcome<Payload> o;
        o.label = "n=" + std::to_string(n) + " t=" + std::to_string(t);
        const auto start = Clock::now();
        o.record = trial_record(hash, t);
        o.record["n"] = n;
        try {
            const auto a = draw_matrix(cfg.master_seed, t, n, fc);
            const auto pivots = certified_gepp(a).pivot_indices;
            const double tail_level = 1.0 / (double(n) * double(n));
            Json steps = Json::array();
            for (auto r : steps_for(cfg, n)) {
                auto k = build_polytope(a, r, pivots);
                k.seed = cfg.master_seed;
                const RngStream ms = RngStream(cfg.master_seed, t).substream(n).substream(kMeasureStreamBase + r);
                const auto m = gaussian_measure_mc(k, cfg.mc_samples, ms);
                const double upper = clopper_pearson_upper(m.hits, m.samples, 1.0 - kMeasureUpperLevel);
                const double lower = m.estimate - 3.0 * m.std_error;
                const double dist = pivot_row_distance(k);
                StepResult s;
                s.measure = m.estimate;
                s.tail = upper <= tail_level;
                s.distance_ok = dist >= std::sqrt(M_PI / 2.0) * lower;
                const auto cons = pivot_consistency(a, r);
                s.consistency_ok = cons.ok();
                o.payload.steps.push_back(s);
                steps.push_back({{"r", r},
                                 {"pivot_rows", k.pivot_rows},
                                 {"measure", real(m.estimate)},
                                 {"std_error", real(m.std_error)},
                                 {"hits", m.hits},
                                 {"samples", m.samples},
                                 {"measure_upper", real(upper)},
                                 {"measure_lower", real(lower)},
                                 {"distance", real(dist)},
                                 {"distance_ok", s.distance_ok},
                                 {"tail_event", s.tail},
                                 {"consistency", {{"gepp_matches", cons.gepp_matches},
                                                  {"restricted_matches", cons.restricted_matches},
                                                  {"outside_rows_inside", cons.outside_rows_inside},
                                                  {"ties", cons.ties}}},
                                 {"thresholds", detail::polytope_json(k)["thresholds"]}});
            }
            o.record["steps"] = std::move(steps);
            o.ok = true;
            o.record["status"] = "ok";
        } catch (const ZeroPivot& e) {
            o.record["status"] = "failure";
            o.record["failure"] = {{"type", "singular_input"}, {"message", e.what()}};
        } catch (const std::exception& e) {
            o.record["status"] = "failure";
            o.record["failure"] = failure_json(e);
        }
        o.seconds = seconds_since(start);
        return o;
    };
    const auto outcomes = ordered_parallel_map(total, cfg.thread_count, task);

    PolytopeResult res;
    w.csv_line({"n", "r", "trials", "failures", "mc_samples", "mean_measure", "tail_count", "tail_freq",
                "tail_ci_lower", "tail_ci_upper", "tail_bound", "distance_violations", "consistency_checked",
                "consistency_failures"});
    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        const std::size_t n = cfg.n_values[ni];
        const auto steps = steps_for(cfg, n);
        std::vector<PolytopeRow> rows(steps.size());
        std::vector<double> sums(steps.size(), 0.0);
        std::uint64_t failures = 0;
        for (std::uint64_t t = 0; t < cfg.trials; ++t) {
            const std::size_t idx = ni * cfg.trials + t;
            const auto& o = outcomes[idx];
            w.trial(idx, o);
            if (!o.ok) {
                ++failures;
                continue;
            }
            for (std::size_t k = 0; k < steps.size(); ++k) {
                const auto& s = o.payload.steps[k];
                ++rows[k].trials;
                sums[k] += s.measure;
                rows[k].tail_count += s.tail ? 1 : 0;
                rows[k].distance_violations += s.distance_ok ? 0 : 1;
                ++rows[k].consistency_checked;
                rows[k].consistency_failures += s.consistency_ok ? 0 : 1;
            }
        }
        for (std::size_t k = 0; k < steps.size(); ++k) {
            auto& row = rows[k];
            row.n = n;
            row.r = steps[k];
            row.failures = failures;
            row.mean_measure = row.trials ? sums[k] / double(row.trials) : 0.0;
            row.tail_bound = std::pow(double(n), -double(n - row.r));
            if (row.trials) row.tail_ci = clopper_pearson(row.tail_count, row.trials);
            w.csv_line({std::to_string(n), std::to_string(row.r), std::to_string(row.trials),
                        std::to_string(row.failures), std::to_string(cfg.mc_samples), csv_real(row.mean_measure),
                        std::to_string(row.tail_count), csv_real(row.tail_freq()), csv_real(row.tail_ci.lower),
                        csv_real(row.tail_ci.upper), csv_real(row.tail_bound),
                        std::to_string(row.distance_violations), std::to_string(row.consistency_checked),
                        std::to_string(row.consistency_failures)});
            res.rows.push_back(row);
        }
    }
    res.files = w.finish();
    res.counts = w.counts();
    return res;
}

// ---------------------------------------------------------------- 2x2 probe

ProbeResult run_probe_2x2(const ExperimentConfig& cfg) {
    validate(cfg);
    if (cfg.eps_values.empty()) throw ConfigError("eps_values", 0, "probe needs at least one eps");
    struct Payload {
        std::vector<Probe2x2Result> per_eps;
    };
    const std::vector<int> precisions = cfg.exact_field ? std::vector<int>{0} : cfg.precision_bits;
    const std::uint64_t chunks = (cfg.trials + kProbeChunk - 1) / kProbeChunk;
    const std::size_t total = precisions.size() * chunks;
    RunWriter w(cfg, cfg.exact_field ? std::vector<std::string>{"exact", "binary64"}
                                     : emulated_tags(precisions, false));
    const std::string hash = w.hash();
    const RngStream base(cfg.master_seed, 0);

    std::function<Outcome<Payload>(std::size_t)> task = [&](std::size_t idx) {
        const int p = precisions[idx / chunks];
        const std::uint64_t c = idx % chunks;
        const std::uint64_t first = c * kProbeChunk;
        const std::uint64_t count = std::min<std::uint64_t>(kProbeChunk, cfg.trials - first);
        Outcome<Payload> o;
        o.label = "p=" + std::to_string(p) + " chunk=" + std::to_string(c);
        const auto start = Clock::now();
        o.record = trial_record(hash, first);
        o.record["precision_bits"] = p;
        o.record["first_trial"] = first;
        o.record["trials"] = count;
        const std::optional<FpConfig> fc = p == 0 ? std::nullopt : std::optional<FpConfig>(FpConfig{p});
        o.payload.per_eps = genp_2x2_instability_probe(cfg.eps_values, count, fc, base, cfg.kappa_max, first);
        Json per = Json::array();
        for (const auto& r : o.payload.per_eps)
            per.push_back({{"eps", real(r.eps)}, {"small_pivot", r.small_pivot}, {"large_backward", r.large_backward}});
        o.record["counts"] = std::move(per);
        o.record["status"] = "ok";
        o.ok = true;
        o.seconds = seconds_since(start);
        return o;
    };
    const auto outcomes = ordered_parallel_map(total, cfg.thread_count, task);

    ProbeResult res;
    w.csv_line({"precision_bits", "eps", "trials", "small_pivot", "freq_small_pivot", "small_ci_lower",
                "small_ci_upper", "large_backward", "freq_large_backward_error"});
    for (std::size_t pi = 0; pi < precisions.size(); ++pi) {
        std::vector<Probe2x2Result> acc(cfg.eps_values.size());
        for (std::uint64_t c = 0; c < chunks; ++c) {
            const std::size_t idx = pi * chunks + c;
            const auto& o = outcomes[idx];
            w.trial(idx, o);
            for (std::size_t k = 0; k < acc.size(); ++k) {
                acc[k].eps = cfg.eps_values[k];
                acc[k].trials += o.payload.per_eps[k].trials;
                acc[k].small_pivot += o.payload.per_eps[k].small_pivot;
                acc[k].large_backward += o.payload.per_eps[k].large_backward;
            }
        }
        for (auto& r : acc) {
            r.freq_small_pivot = r.trials ? double(r.small_pivot) / double(r.trials) : 0.0;
            r.freq_large_backward_error = r.small_pivot ? double(r.large_backward) / double(r.small_pivot) : 0.0;
            ProbeRow row;
            row.precision_bits = precisions[pi];
            row.result = r;
            row.small_pivot_ci = clopper_pearson(r.small_pivot, r.trials);
            w.csv_line({std::to_string(row.precision_bits), csv_real(r.eps), std::to_string(r.trials),
                        std::to_string(r.small_pivot), csv_real(r.freq_small_pivot),
                        csv_real(row.small_pivot_ci.lower), csv_real(row.small_pivot_ci.upper),
                        std::to_string(r.large_backward), csv_real(r.freq_large_backward_error)});
            res.rows.push_back(row);
        }
    }
    res.files = w.finish();
    res.counts = w.counts();
    return res;
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    auto pack = [](const auto& r) { return RunSummary{r.files, r.counts}; };
    switch (cfg.experiment) {
        case ExperimentKind::growth_sweep: return pack(run_growth_sweep(cfg));
        case ExperimentKind::tail: return pack(run_tail_estimate(cfg));
        case ExperimentKind::events: return pack(run_event_frequencies(cfg));
        case ExperimentKind::compare_genp: return pack(compare_gepp_genp(cfg));
        case ExperimentKind::polytope: return pack(run_polytope(cfg));
        case ExperimentKind::probe_2x2: return pack(run_probe_2x2(cfg));
    }
    throw ConfigError("experiment", 0, "unknown experiment");
}

}  // namespace pivotlab
