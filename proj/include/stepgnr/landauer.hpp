#ifndef STEPGNR_LANDAUER_HPP
#define STEPGNR_LANDAUER_HPP

#include "stepgnr/negf.hpp"

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace stepgnr {

/// G0 = 2 e^2 / h in siemens.
inline constexpr double kConductanceQuantum = 7.748091729e-5;

struct QuadratureOptions {
    int initial_intervals = 16;
    double rel_tol = 1e-4;
    double abs_floor = 1e-9;  ///< eV; below this integral size the tolerance is absolute
    int max_depth = 30;
    int max_evaluations = 20000;
};

struct TransportOptions {
    double eta = 1e-4;
    DecimationOptions decimation;
    QuadratureOptions quadrature;
    /// Freeze T(E) at zero bias and only move the integration window.
    bool linear_response = false;
    int threads = 1;
};

struct Integration {
    double value = 0.0;
    double previous = 0.0;  ///< estimate one refinement level coarser
    int evaluations = 0;
    int depth = 0;
    double min_step = 0.0;
};

/// Adaptive trapezoid integration of f over [lo, hi]. Intervals with the
/// largest coarse/fine disagreement are bisected until the summed
/// disagreement is below rel_tol * max(|I|, abs_floor). Midpoints of one
/// round are evaluated in parallel; the refinement pattern only depends on
/// the function values. Throws ConvergenceError with the last two estimates
/// when max_depth or max_evaluations is reached first.
Integration integrate_window(const std::function<double(double)>& f, double lo, double hi,
                             const QuadratureOptions& opts, int threads = 1);

struct CurrentResult {
    double current = 0.0;  ///< A
    Integration integral;  ///< integral of T over the bias window (eV)
};

/// Zero-temperature Landauer current I = G0 * integral of T(E) over
/// [mu_R, mu_L]. h must be assembled at the same bias. For v_b < 0 the
/// window is traversed the other way and the current changes sign.
CurrentResult current(const BlockHamiltonian& h, double v_b, const TransportOptions& opts = {});

struct IVCurve {
    std::vector<double> biases;
    std::vector<double> currents;
    Fingerprint device;
    std::vector<Integration> integration;
    bool linear_response = false;
};

/// Current at each bias; the Hamiltonian and self-energies are rebuilt per
/// bias. Biases must be strictly increasing.
IVCurve iv_curve(const DeviceGeometry& geom, const HoppingModel& model, std::span<const double> biases,
                 const TransportOptions& opts = {});

enum class SweepParameter { CurvatureRadius, StepHeight, BendAngle };

const char* to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(const std::string& name);

struct StepParameters {
    double step_height = 0.0;
    double curvature_radius = 0.0;
    double bend_angle_deg = 0.0;
};

/// max_V |I_bent - I_flat| / max(max_V |I_flat|, floor)
double deviation_metric(const IVCurve& bent, const IVCurve& flat, double floor = 1e-12);

struct SweepReport {
    SweepParameter parameter = SweepParameter::StepHeight;
    StepParameters fixed;  ///< swept entry is ignored
    RibbonSpec spec;
    HoppingModel model;
    std::vector<double> values;
    std::vector<double> effective_angles;  ///< theta_eff per value (degrees)
    std::vector<IVCurve> curves;
    IVCurve flat;
    std::vector<double> deviations;
    std::vector<double> field_v_per_nm;  ///< V_b / channel length per bias
};

/// I-V curves for each value of one parameter with the other two fixed,
/// plus D against the flat ribbon. A precomputed flat curve on the same
/// biases may be passed to skip recomputing it.
SweepReport sweep(const RibbonSpec& spec, const HoppingModel& model, SweepParameter parameter,
                  std::span<const double> values, const StepParameters& fixed, std::span<const double> biases,
                  const TransportOptions& opts = {}, const IVCurve* flat_reference = nullptr);

/// Span of each parameter over the configurations studied (H 0.78-2.3 nm,
/// CR 0.40-3.1 nm, theta 30-90 deg); sensitivities are expressed per span.
double reference_span(SweepParameter p);

struct SensitivityRanking {
    std::array<SweepParameter, 3> order{};
    std::array<double, 3> sensitivity{};  ///< matches order
    bool tie = false;
    bool all_tie = false;
};

/// Orders {CR, H, theta} by the range of D across each sweep, scaled to the
/// reference span. Ties are broken alphabetically and flagged. Throws
/// ValidationError when the reports do not share a flat baseline (ribbon,
/// model, biases) or do not cover each parameter exactly once.
SensitivityRanking sensitivity_rank(std::span<const SweepReport> reports);

}  // namespace stepgnr

#endif
