#include "qrf/galilei.hpp"

#include <cmath>
#include <stdexcept>

namespace qrf {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

double galilei_p(const GalileiParams& g, double a, double v) {
    const double m = g.m, w2 = g.omega * g.omega;
    const double da1 = a - g.a1, da2 = a - g.a2;
    const double dv1 = v - g.v1, dv2 = v - g.v2;

    const double peak1 = std::exp(-m * da1 * da1 / (2.0 * w2) - m * w2 * dv1 * dv1 / 2.0);
    const double peak2 = std::exp(-m * da2 * da2 / (2.0 * w2) - m * w2 * dv2 * dv2 / 2.0);
    const double envelope = std::exp(-m * (da1 * da1 + da2 * da2) / (4.0 * w2) -
                                     m * w2 * (dv1 * dv1 + dv2 * dv2) / 4.0);
    const double phase =
        m * ((g.v1 - g.v2) * a - v * (g.a1 - g.a2)) / 2.0 + m * (g.theta1 - g.theta2);

    return (kPi / m) * (peak1 + peak2) + (2.0 * kPi / m) * envelope * std::cos(phase);
}

double galilei_total_analytic(const GalileiParams& g) {
    const double m = g.m, w2 = g.omega * g.omega;
    const double da = g.a1 - g.a2, dv = g.v1 - g.v2;
    const double mag = std::exp(-m * da * da / (4.0 * w2) - m * w2 * dv * dv / 4.0);
    // <1|2> phase: m (v2 a1 - v1 a2)/2 + m (theta2 - theta1)
    const double ph = m * (g.v2 * g.a1 - g.v1 * g.a2) / 2.0 + m * (g.theta2 - g.theta1);
    const double scale = 2.0 * kPi / m;
    return scale * scale * (1.0 + mag * std::cos(ph));
}

double galilei_sigma_a(const GalileiParams& g) { return g.omega / std::sqrt(g.m); }
double galilei_sigma_v(const GalileiParams& g) { return 1.0 / (g.omega * std::sqrt(g.m)); }

double galilei_quadrature(const GalileiParams& g, double a_lo, double a_hi, double v_lo,
                          double v_hi, std::size_t na, std::size_t nv) {
    if (na < 2 || nv < 2)
        throw std::invalid_argument("galilei_quadrature: need at least a 2x2 grid");
    const double ha = (a_hi - a_lo) / static_cast<double>(na - 1);
    const double hv = (v_hi - v_lo) / static_cast<double>(nv - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
        const double a = a_lo + ha * static_cast<double>(i);
        const double wa = (i == 0 || i + 1 == na) ? 0.5 : 1.0;
        double row = 0.0;
        for (std::size_t j = 0; j < nv; ++j) {
            const double v = v_lo + hv * static_cast<double>(j);
            const double wv = (j == 0 || j + 1 == nv) ? 0.5 : 1.0;
            row += wv * galilei_p(g, a, v);
        }
        total += wa * row;
    }
    return total * ha * hv;
}

double galilei_fitted_half_width(const GalileiParams& g, double a_center, double v_center) {
    // local maximum search around a_center along the a axis
    const double sa = galilei_sigma_a(g);
    double best_a = a_center, best_p = galilei_p(g, a_center, v_center);
    const int scan = 400;
    for (int i = -scan; i <= scan; ++i) {
        const double a = a_center + 2.0 * sa * static_cast<double>(i) / scan;
        const double p = galilei_p(g, a, v_center);
        if (p > best_p) {
            best_p = p;
            best_a = a;
        }
    }
    const double half = best_p / 2.0;
    // bisection for the right half-max crossing
    double lo = best_a, hi = best_a + 6.0 * sa;
    while (galilei_p(g, hi, v_center) > half)
        hi += 2.0 * sa;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (galilei_p(g, mid, v_center) > half)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi) - best_a;
}

std::vector<GalileiGridPoint> galilei_grid(const GalileiParams& g, double a_lo, double a_hi,
                                           std::size_t na, double v_lo, double v_hi,
                                           std::size_t nv) {
    std::vector<GalileiGridPoint> out;
    out.reserve(na * nv);
    for (std::size_t i = 0; i < na; ++i) {
        const double a = na == 1 ? a_lo : a_lo + (a_hi - a_lo) * static_cast<double>(i) / (na - 1);
        for (std::size_t j = 0; j < nv; ++j) {
            const double v =
                nv == 1 ? v_lo : v_lo + (v_hi - v_lo) * static_cast<double>(j) / (nv - 1);
            out.push_back({a, v, galilei_p(g, a, v)});
        }
    }
    return out;
}

} // namespace qrf
