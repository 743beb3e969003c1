#ifndef COAXDISP_ERRORS_HPP
#define COAXDISP_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace coaxdisp {

enum class errc {
    non_finite,
    overflow,
    pole_at_zero,
    pole_hit,
    degenerate_at_cut,
    contour_too_close,
    cut_crossed,
    not_simple_zero,
    no_convergence,
    continuation_break,
    ill_conditioned,
    bad_radius,
    degenerate_excitation,
    contour_leak,
    pole_between_contours,
    grid_mismatch,
    invalid_model,
    config,
};

constexpr std::string_view to_string(errc e)
{
    switch (e) {
    case errc::non_finite: return "NonFinite";
    case errc::overflow: return "Overflow";
    case errc::pole_at_zero: return "PoleAtZero";
    case errc::pole_hit: return "PoleHit";
    case errc::degenerate_at_cut: return "DegenerateAtCut";
    case errc::contour_too_close: return "ContourTooClose";
    case errc::cut_crossed: return "CutCrossed";
    case errc::not_simple_zero: return "NotSimpleZero";
    case errc::no_convergence: return "NoConvergence";
    case errc::continuation_break: return "ContinuationBreak";
    case errc::ill_conditioned: return "IllConditioned";
    case errc::bad_radius: return "BadRadius";
    case errc::degenerate_excitation: return "DegenerateExcitation";
    case errc::contour_leak: return "ContourLeak";
    case errc::pole_between_contours: return "PoleBetweenContours";
    case errc::grid_mismatch: return "GridMismatch";
    case errc::invalid_model: return "InvalidModel";
    case errc::config: return "ConfigError";
    }
    return "Unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace coaxdisp

#endif
