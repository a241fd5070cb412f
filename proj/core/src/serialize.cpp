#include "pivotlab/serialize.hpp"

#include <cstdio>

#include "json_util.hpp"

namespace pivotlab {

std::string real_string(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

Json real(double x) { return real_string(x); }

Json real(const std::optional<double>& x) { return x ? real(*x) : Json(nullptr); }

namespace {

template <class T>
Json scalar_object(const T& x) {
    Json j;
    j["decimal"] = decimal_string(x);
    j["lossless"] = lossless_string(x);
    j["field"] = field_tag(x);
    return j;
}

template <class T>
Json matrix_json(const Matrix<T>& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(lossless_string(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

Json scalar(const Rational& x) { return scalar_object(x); }
Json scalar(const EmulatedFloat& x) { return scalar_object(x); }
Json scalar(double x) { return scalar_object(x); }

template <class T>
Json trace_json(const EliminationTrace<T>& tr, bool with_intermediates) {
    Json j;
    j["variant"] = to_string(tr.variant);
    j["field"] = tr.field;
    j["n"] = tr.n;
    j["pivot_indices"] = tr.pivot_indices;
    Json tp = Json::array();
    for (const auto& t : tr.transpositions) tp.push_back({t.step, t.row});
    j["transpositions"] = std::move(tp);
    j["row_order"] = tr.row_order;
    j["max_abs_input"] = scalar(tr.max_abs_input);
    j["max_abs_intermediate"] = scalar(tr.max_abs_intermediate);
    j["last_pivot_zero"] = tr.last_pivot_zero;
    j["L"] = matrix_json(tr.L);
    j["U"] = matrix_json(tr.U);
    if (with_intermediates && tr.has_intermediates()) {
        Json all = Json::array();
        for (const auto& m : tr.intermediates) all.push_back(matrix_json(m));
        j["intermediates"] = std::move(all);
    }
    return j;
}

template Json trace_json(const EliminationTrace<Rational>&, bool);
template Json trace_json(const EliminationTrace<EmulatedFloat>&, bool);
template Json trace_json(const EliminationTrace<double>&, bool);

Json polytope_json(const PivotPolytope& k) {
    Json j;
    j["r"] = k.r;
    j["ambient_dim"] = k.ambient_dim;
    j["pivot_rows"] = k.pivot_rows;
    Json normals = Json::array();
    for (const auto& v : k.normals) {
        Json row = Json::array();
        for (const auto& x : v) row.push_back(lossless_string(x));
        normals.push_back(std::move(row));
    }
    j["normals"] = std::move(normals);
    Json th = Json::array();
    for (const auto& b : k.thresholds) th.push_back(scalar(b));
    j["thresholds"] = std::move(th);
    j["seed"] = k.seed ? Json(*k.seed) : Json(nullptr);
    return j;
}

Json profile_json(const SpectrumProfile& p) {
    Json j;
    j["r"] = p.r;
    Json s = Json::array();
    for (double x : p.sigma) s.push_back(real(x));
    j["sigma"] = std::move(s);
    j["widen"] = p.widen;
    j["smin_rect"] = real(p.smin_rect);
    return j;
}

Json report_json(const StabilityReport& r) {
    Json j;
    j["n"] = r.n;
    j["precision_bits"] = r.precision_bits;
    j["fp_succeeded"] = r.fp_succeeded;
    j["fp_failure_step"] = r.fp_failure_step ? Json(*r.fp_failure_step) : Json(nullptr);
    j["g_fp"] = real(r.g_fp);
    j["g_exact"] = real(r.g_exact);
    j["g_exact_lower"] = real(r.g_exact_lower);
    j["g_exact_upper"] = real(r.g_exact_upper);
    j["g_exact_method"] = r.g_exact_method;
    j["backward_norm"] = real(r.backward_norm);
    j["backward_norm_bracket"] = "hs_upper";
    j["forward_rel"] = real(r.forward_rel);
    j["kappa"] = real(r.kappa);
    j["kappa_carrier"] = r.kappa_carrier;
    j["pivot_match"] = r.pivot_match;
    return j;
}

}  // namespace detail

std::string trace_to_json(const EliminationTrace<Rational>& tr, bool with_intermediates) {
    return detail::trace_json(tr, with_intermediates).dump();
}
std::string trace_to_json(const EliminationTrace<EmulatedFloat>& tr, bool with_intermediates) {
    return detail::trace_json(tr, with_intermediates).dump();
}
std::string trace_to_json(const EliminationTrace<double>& tr, bool with_intermediates) {
    return detail::trace_json(tr, with_intermediates).dump();
}
std::string polytope_to_json(const PivotPolytope& k) { return detail::polytope_json(k).dump(); }
std::string profile_to_json(const SpectrumProfile& p) { return detail::profile_json(p).dump(); }
std::string report_to_json(const StabilityReport& r) { return detail::report_json(r).dump(); }

}  // namespace pivotlab
