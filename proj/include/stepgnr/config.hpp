#ifndef STEPGNR_CONFIG_HPP
#define STEPGNR_CONFIG_HPP

#include "stepgnr/landauer.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stepgnr {

/// Bad or missing configuration entry; the message names the key.
class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

struct SweepSpec {
    SweepParameter parameter = SweepParameter::StepHeight;
    std::vector<double> values;
    StepParameters fixed;
};

/// Everything one CLI run needs. Units: nm, eV, V, degrees.
struct RunConfig {
    RibbonSpec ribbon;
    std::optional<StepParameters> step;  ///< absent: flat ribbon
    HoppingModel model;
    EnergyGrid grid{-1.0, 1.0, 201, 1e-4};
    double ldos_eta = 5e-3;
    std::vector<double> biases{0.0};
    std::vector<int> ldos_atoms;  ///< empty: the tagged sampling atoms
    QuadratureOptions quadrature;
    DecimationOptions decimation;
    std::vector<SweepSpec> sweeps;
    std::string out_dir;

    TransportOptions transport(bool linear_response, int threads) const;
};

/*
 * Text format: one `key = value` per line, `#` starts a comment, lists are
 * comma separated. Unknown or repeated keys are errors.
 *
 *   n_a, n_cells_channel            required
 *   n_cells_lead, a_cc
 *   step_height, curvature_radius, bend_angle      all three or none
 *   v_pp_pi, v_pp_sigma, decay_beta, cutoff, edge_enhancement
 *   e_min, e_max, n_points, eta, ldos_eta
 *   biases, ldos_atoms
 *   quad_tol, quad_initial_intervals, quad_max_depth, quad_max_evaluations
 *   decimation_tol, decimation_max_iter
 *   out_dir
 *   sweep_h_values,     sweep_h_curvature_radius,     sweep_h_bend_angle
 *   sweep_cr_values,    sweep_cr_step_height,         sweep_cr_bend_angle
 *   sweep_theta_values, sweep_theta_step_height,      sweep_theta_curvature_radius
 *
 * Fixed sweep parameters fall back to step_height / curvature_radius /
 * bend_angle when their sweep-specific key is absent.
 */
RunConfig parse_config(std::string_view text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace stepgnr

#endif
