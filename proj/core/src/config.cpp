#include "pivotlab/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <variant>

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

namespace pivotlab {

namespace {

/// A scalar read from TOML or from a command-line string.
using Scalar = std::variant<std::int64_t, double, bool, std::string>;

enum class Kind { u64, size_list, int_list, real, real_list, text, flag, experiment };

struct Field {
    Kind kind;
    std::function<void(ExperimentConfig&, const std::vector<Scalar>&)> set;
};

[[noreturn]] void fail(const std::string& key, std::size_t line, const std::string& msg) {
    throw ConfigError(key, line, msg);
}

std::int64_t as_int(const Scalar& s, const std::string& key, std::size_t line) {
    if (auto* i = std::get_if<std::int64_t>(&s)) return *i;
    fail(key, line, "expected an integer");
}

std::uint64_t as_nonneg(const Scalar& s, const std::string& key, std::size_t line) {
    const auto v = as_int(s, key, line);
    if (v < 0) fail(key, line, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
}

double as_real(const Scalar& s, const std::string& key, std::size_t line) {
    if (auto* d = std::get_if<double>(&s)) return *d;
    if (auto* i = std::get_if<std::int64_t>(&s)) return static_cast<double>(*i);
    fail(key, line, "expected a number");
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> t;
        auto one = [](const std::vector<Scalar>& v, const std::string& key) -> const Scalar& {
            if (v.size() != 1) throw ConfigError(key, 0, "expected a single value");
            return v.front();
        };
        t["experiment"] = {Kind::experiment, [one](ExperimentConfig& c, const std::vector<Scalar>& v) {
                               const auto* s = std::get_if<std::string>(&one(v, "experiment"));
                               if (!s) fail("experiment", 0, "expected a string");
                               c.experiment = parse_experiment_kind(*s);
                           }};
        auto size_list = [](std::vector<std::size_t> ExperimentConfig::*member, std::string key) {
            return Field{Kind::size_list, [member, key](ExperimentConfig& c, const std::vector<Scalar>& v) {
                             std::vector<std::size_t> out;
                             for (const auto& s : v) out.push_back(as_nonneg(s, key, 0));
                             c.*member = out;
                         }};
        };
        auto real_list = [](std::vector<double> ExperimentConfig::*member, std::string key) {
            return Field{Kind::real_list, [member, key](ExperimentConfig& c, const std::vector<Scalar>& v) {
                             std::vector<double> out;
                             for (const auto& s : v) out.push_back(as_real(s, key, 0));
                             c.*member = out;
                         }};
        };
        auto u64 = [one](auto member, std::string key) {
            return Field{Kind::u64, [one, member, key](ExperimentConfig& c, const std::vector<Scalar>& v) {
                             c.*member = static_cast<std::remove_reference_t<decltype(c.*member)>>(
                                 as_nonneg(one(v, key), key, 0));
                         }};
        };
        auto real = [one](double ExperimentConfig::*member, std::string key) {
            return Field{Kind::real, [one, member, key](ExperimentConfig& c, const std::vector<Scalar>& v) {
                             c.*member = as_real(one(v, key), key, 0);
                         }};
        };
        t["n_values"] = size_list(&ExperimentConfig::n_values, "n_values");
        t["r_values"] = size_list(&ExperimentConfig::r_values, "r_values");
        t["precision_bits"] = {Kind::int_list, [](ExperimentConfig& c, const std::vector<Scalar>& v) {
                                   std::vector<int> out;
                                   for (const auto& s : v)
                                       out.push_back(static_cast<int>(as_int(s, "precision_bits", 0)));
                                   c.precision_bits = out;
                               }};
        t["t_grid"] = real_list(&ExperimentConfig::t_grid, "t_grid");
        t["eps_values"] = real_list(&ExperimentConfig::eps_values, "eps_values");
        t["sv_scales"] = real_list(&ExperimentConfig::sv_scales, "sv_scales");
        t["sv_index"] = u64(&ExperimentConfig::sv_index, "sv_index");
        t["trials"] = u64(&ExperimentConfig::trials, "trials");
        t["master_seed"] = u64(&ExperimentConfig::master_seed, "master_seed");
        t["thread_count"] = u64(&ExperimentConfig::thread_count, "thread_count");
        t["mc_samples"] = u64(&ExperimentConfig::mc_samples, "mc_samples");
        t["bareiss_max_n"] = u64(&ExperimentConfig::bareiss_max_n, "bareiss_max_n");
        t["forward_max_n"] = u64(&ExperimentConfig::forward_max_n, "forward_max_n");
        t["kappa_wide_max_n"] = u64(&ExperimentConfig::kappa_wide_max_n, "kappa_wide_max_n");
        t["c_prime"] = real(&ExperimentConfig::c_prime, "c_prime");
        t["beta"] = real(&ExperimentConfig::beta, "beta");
        t["kappa_max"] = real(&ExperimentConfig::kappa_max, "kappa_max");
        t["conditioned_pivot"] = real(&ExperimentConfig::conditioned_pivot, "conditioned_pivot");
        t["output_dir"] = {Kind::text, [one](ExperimentConfig& c, const std::vector<Scalar>& v) {
                               const auto* s = std::get_if<std::string>(&one(v, "output_dir"));
                               if (!s) fail("output_dir", 0, "expected a string");
                               c.output_dir = *s;
                           }};
        t["exact_field"] = {Kind::flag, [one](ExperimentConfig& c, const std::vector<Scalar>& v) {
                                const auto* b = std::get_if<bool>(&one(v, "exact_field"));
                                if (!b) fail("exact_field", 0, "expected true or false");
                                c.exact_field = *b;
                            }};
        return t;
    }();
    return table;
}

std::optional<Scalar> from_node(const toml::node& node) {
    if (auto v = node.value_exact<std::int64_t>()) return Scalar{*v};
    if (auto v = node.value_exact<double>()) return Scalar{*v};
    if (auto v = node.value_exact<bool>()) return Scalar{*v};
    if (auto v = node.value_exact<std::string>()) return Scalar{*v};
    return std::nullopt;
}

Scalar from_text(const std::string& raw, const std::string& key) {
    std::string s = raw;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s == "true") return Scalar{true};
    if (s == "false") return Scalar{false};
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
    if (ec == std::errc() && p == s.data() + s.size()) return Scalar{i};
    double d = 0.0;
    auto [q, ec2] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec2 == std::errc() && q == s.data() + s.size()) return Scalar{d};
    if (s.empty()) fail(key, 0, "empty value");
    return Scalar{s};
}

std::string fmt_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + f(v[i]);
    return out + "]";
}

}  // namespace

ConfigError::ConfigError(std::string field, std::size_t line, const std::string& message)
    : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string()) +
                         (field.empty() ? std::string() : "field '" + field + "': ") + message),
      field_(std::move(field)),
      line_(line) {}

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::growth_sweep: return "growth_sweep";
        case ExperimentKind::tail: return "tail";
        case ExperimentKind::polytope: return "polytope";
        case ExperimentKind::events: return "events";
        case ExperimentKind::compare_genp: return "compare_genp";
        case ExperimentKind::probe_2x2: return "probe_2x2";
    }
    return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
    for (auto k : {ExperimentKind::growth_sweep, ExperimentKind::tail, ExperimentKind::polytope,
                   ExperimentKind::events, ExperimentKind::compare_genp, ExperimentKind::probe_2x2})
        if (s == to_string(k)) return k;
    throw ConfigError("experiment", 0, "unknown experiment '" + s + "'");
}

std::string canonical_text(const ExperimentConfig& c) {
    auto num = [](auto x) { return std::to_string(x); };
    std::ostringstream o;
    o << "experiment = " << to_string(c.experiment) << "\n"
      << "n_values = " << join(c.n_values, num) << "\n"
      << "trials = " << c.trials << "\n"
      << "master_seed = " << c.master_seed << "\n"
      << "precision_bits = " << join(c.precision_bits, num) << "\n"
      << "c_prime = " << fmt_real(c.c_prime) << "\n"
      << "t_grid = " << join(c.t_grid, fmt_real) << "\n"
      << "r_values = " << join(c.r_values, num) << "\n"
      << "mc_samples = " << c.mc_samples << "\n"
      << "eps_values = " << join(c.eps_values, fmt_real) << "\n"
      << "beta = " << fmt_real(c.beta) << "\n"
      << "kappa_max = " << fmt_real(c.kappa_max) << "\n"
      << "conditioned_pivot = " << fmt_real(c.conditioned_pivot) << "\n"
      << "exact_field = " << (c.exact_field ? "true" : "false") << "\n"
      << "bareiss_max_n = " << c.bareiss_max_n << "\n"
      << "forward_max_n = " << c.forward_max_n << "\n"
      << "kappa_wide_max_n = " << c.kappa_wide_max_n << "\n"
      << "sv_index = " << c.sv_index << "\n"
      << "sv_scales = " << join(c.sv_scales, fmt_real) << "\n";
    return o.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_text(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    toml::table tbl;
    try {
        tbl = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        throw ConfigError("", e.source().begin.line, std::string(e.description()));
    }
    ExperimentConfig cfg;
    for (const auto& [k, node] : tbl) {
        const std::string key(k.str());
        const std::size_t line = node.source().begin.line;
        const auto it = fields().find(key);
        if (it == fields().end()) throw ConfigError(key, line, "unknown field");
        std::vector<Scalar> values;
        if (const auto* arr = node.as_array()) {
            for (const auto& el : *arr) {
                auto s = from_node(el);
                if (!s) throw ConfigError(key, line, "unsupported array element");
                values.push_back(*s);
            }
        } else {
            auto s = from_node(node);
            if (!s) throw ConfigError(key, line, "unsupported value type");
            values.push_back(*s);
        }
        try {
            it->second.set(cfg, values);
        } catch (const ConfigError& e) {
            // Setters do not know the line; re-raise with it.
            std::string msg = e.what();
            const auto pos = msg.find("': ");
            throw ConfigError(key, line, pos == std::string::npos ? msg : msg.substr(pos + 3));
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError(key, 0, "unknown field");
    std::vector<Scalar> values;
    const Kind kind = it->second.kind;
    if (kind == Kind::size_list || kind == Kind::int_list || kind == Kind::real_list) {
        std::string item;
        std::istringstream in(value);
        while (std::getline(in, item, ',')) values.push_back(from_text(item, key));
    } else {
        values.push_back(from_text(value, key));
    }
    it->second.set(cfg, values);
}

void apply_environment(ExperimentConfig& cfg) {
    const char* env = std::getenv("PIVOTLAB_THREADS");
    if (!env || !*env) return;
    const std::string s(env);
    unsigned v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || v == 0)
        throw ConfigError("PIVOTLAB_THREADS", 0, "expected a positive integer, got '" + s + "'");
    cfg.thread_count = v;
}

void validate(const ExperimentConfig& c) {
    if (c.trials < 1) throw ConfigError("trials", 0, "must be >= 1");
    if (c.n_values.empty()) throw ConfigError("n_values", 0, "must not be empty");
    for (auto n : c.n_values)
        if (n < 2) throw ConfigError("n_values", 0, "every n must be >= 2");
    if (c.precision_bits.empty()) throw ConfigError("precision_bits", 0, "must not be empty");
    for (int p : c.precision_bits)
        if (p < 2) throw ConfigError("precision_bits", 0, "every precision must be >= 2");
    if (c.thread_count < 1) throw ConfigError("thread_count", 0, "must be >= 1");
    if (!(c.c_prime > 0.0 && c.c_prime <= 1.0)) throw ConfigError("c_prime", 0, "must lie in (0, 1]");
    if (c.experiment == ExperimentKind::tail && c.t_grid.empty())
        throw ConfigError("t_grid", 0, "tail experiment needs a nonempty grid");
    for (std::size_t i = 1; i < c.t_grid.size(); ++i)
        if (!(c.t_grid[i] > c.t_grid[i - 1])) throw ConfigError("t_grid", 0, "must be strictly increasing");
    for (double s : c.sv_scales)
        if (!(s > 0.0)) throw ConfigError("sv_scales", 0, "every scale must be positive");
    if (!(c.beta >= 2.0)) throw ConfigError("beta", 0, "must be >= 2");
    if (c.mc_samples < 1) throw ConfigError("mc_samples", 0, "must be >= 1");
    if (!(c.kappa_max >= 1.0)) throw ConfigError("kappa_max", 0, "must be >= 1");
    if (!(c.conditioned_pivot > 0.0)) throw ConfigError("conditioned_pivot", 0, "must be positive");
    for (double e : c.eps_values)
        if (!(e > 0.0 && e < 1.0)) throw ConfigError("eps_values", 0, "every eps must lie in (0, 1)");
    if (c.output_dir.empty()) throw ConfigError("output_dir", 0, "must not be empty");
}

}  // namespace pivotlab
