#ifndef COAXDISP_CONSTANTS_HPP
#define COAXDISP_CONSTANTS_HPP

#include <complex>
#include <numbers>

namespace coaxdisp {

using cplx = std::complex<double>;

namespace constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double gamma = std::numbers::egamma;
inline constexpr double c0 = 299792458.0;
inline constexpr double mu0 = 4.0e-7 * pi;
inline constexpr double eps0 = 1.0 / (mu0 * c0 * c0);
// sqrt(mu0/eps0) == mu0*c0 exactly, which keeps this constexpr
inline constexpr double eta0 = mu0 * c0;

// Im(alpha) in Np/m -> dB/100 km
inline constexpr double db_per_100km = 2.0e6 * std::numbers::log10e;

} // namespace constants

inline constexpr cplx I{0.0, 1.0};

} // namespace coaxdisp

#endif
