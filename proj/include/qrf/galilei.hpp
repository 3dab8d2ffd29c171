#ifndef QRFKIT_GALILEI_HPP
#define QRFKIT_GALILEI_HPP

#include <cstddef>
#include <vector>

namespace qrf {

// Squeezed-coherent-state frame for the (centrally extended) 1D Galilei
// group, with the frame state a superposition of two orientation states at
// (theta_i, a_i, v_i); t is fixed to 0 throughout.
struct GalileiParams {
    double m = 1.0;       // mass
    double omega = 1.0;   // squeezing
    double theta1 = 0.0, a1 = 0.0, v1 = 0.0;
    double theta2 = 0.0, a2 = 0.0, v2 = 0.0;
};

// Orientation probability density p(a, v): two Gaussian peaks with a cosine
// interference ridge. The pointwise value can dip negative within floating
// error; only the integral contract below is meaningful globally.
double galilei_p(const GalileiParams& p, double a, double v);

// exact value of the 2-D integral of p over the plane:
// (2 pi / m)^2 (1 + Re <theta1,a1,v1 | theta2,a2,v2>)
double galilei_total_analytic(const GalileiParams& p);

// standard deviations of a single peak along a and along v
double galilei_sigma_a(const GalileiParams& p);
double galilei_sigma_v(const GalileiParams& p);

// trapezoid quadrature of p over [a_lo,a_hi] x [v_lo,v_hi]
double galilei_quadrature(const GalileiParams& p, double a_lo, double a_hi, double v_lo,
                          double v_hi, std::size_t na, std::size_t nv);

// half width at half maximum along the a-axis through (a_center, v_center);
// fitted from the curve by local maximum search plus bisection
double galilei_fitted_half_width(const GalileiParams& p, double a_center, double v_center);

struct GalileiGridPoint {
    double a, v, p;
};

std::vector<GalileiGridPoint> galilei_grid(const GalileiParams& p, double a_lo, double a_hi,
                                           std::size_t na, double v_lo, double v_hi,
                                           std::size_t nv);

} // namespace qrf

#endif
