// nlohmann builders shared by serialize.cpp and experiment.cpp. Not installed.
#pragma once

#include <optional>

#include "json.hpp"
#include "pivotlab/serialize.hpp"

namespace pivotlab::detail {

using Json = nlohmann::ordered_json;

Json real(double x);
Json real(const std::optional<double>& x);
Json scalar(const Rational& x);
Json scalar(const EmulatedFloat& x);
Json scalar(double x);

template <class T>
Json trace_json(const EliminationTrace<T>& tr, bool with_intermediates);
Json polytope_json(const PivotPolytope& k);
Json profile_json(const SpectrumProfile& p);
Json report_json(const StabilityReport& r);

}  // namespace pivotlab::detail
