#include "pivotlab/matrix.hpp"

#include <cmath>

namespace pivotlab {

Matrix<EmulatedFloat> round_matrix(const Matrix<Rational>& m, FpConfig cfg) {
    return m.map([cfg](const Rational& x) { return round_to_precision(x, cfg); });
}

ExactHsNorm hs_norm(const Matrix<Rational>& m) {
    ExactHsNorm out;
    for (const auto& x : m.data()) out.squared += x * x;
    // Correctly rounded square root through a wide carrier.
    auto wide = round_to_precision(out.squared, FpConfig{128});
    out.approx = sqrt(wide).to_double();
    return out;
}

EmulatedFloat hs_norm(const Matrix<EmulatedFloat>& m) {
    if (m.data().empty()) return EmulatedFloat();
    EmulatedFloat acc(m(0, 0).config());
    for (const auto& x : m.data()) acc += x * x;
    return sqrt(acc);
}

double hs_norm(const Matrix<double>& m) {
    // Scaled accumulation avoids overflow for large entries.
    double scale = 0.0;
    double ssq = 1.0;
    for (double x : m.data()) {
        if (x == 0.0) continue;
        const double a = std::fabs(x);
        if (scale < a) {
            ssq = 1.0 + ssq * (scale / a) * (scale / a);
            scale = a;
        } else {
            ssq += (a / scale) * (a / scale);
        }
    }
    return scale * std::sqrt(ssq);
}

}  // namespace pivotlab
