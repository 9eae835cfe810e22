#ifndef STEPGNR_NEGF_HPP
#define STEPGNR_NEGF_HPP

#include "stepgnr/model.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace stepgnr {

struct EnergyGrid {
    double e_min = -1.0;
    double e_max = 1.0;
    int n_points = 2;
    double eta = 1e-4;  ///< positive broadening (eV)

    void validate() const;
    double at(int i) const;
    std::vector<double> energies() const;
};

struct DecimationOptions {
    double tol = 1e-12;
    int max_iter = 100;
};

/// Surface Green's functions of both semi-infinite continuations of a lead:
/// `left` terminates a lead that extends to -infinity (couples to the device
/// through its right face), `right` one that extends to +infinity.
struct SurfaceGreen {
    Eigen::MatrixXcd left;
    Eigen::MatrixXcd right;
    int iterations = 0;
    double residual = 0.0;
};

/// Sancho-Rubio decimation at E + i eta. Throws ConvergenceError (with the
/// final coupling norm) if the effective coupling does not drop below tol.
SurfaceGreen surface_gf(const LeadBlocks& lead, double energy, double eta, const DecimationOptions& opts = {});

struct SelfEnergies {
    Eigen::MatrixXcd sigma_left;
    Eigen::MatrixXcd sigma_right;
    Eigen::MatrixXcd gamma_left;
    Eigen::MatrixXcd gamma_right;
};

/// Sigma = tau g tau^dagger, Gamma = i (Sigma - Sigma^dagger). tau_* is the
/// device-to-lead coupling block (device rows, lead columns).
SelfEnergies self_energies(const Eigen::MatrixXcd& gs_left, const Eigen::MatrixXcd& gs_right,
                           const Eigen::MatrixXd& tau_left, const Eigen::MatrixXd& tau_right);

/// Self-energies of both leads of a device at one energy. Decimates once when
/// the two leads are identical (zero bias).
SelfEnergies lead_self_energies(const BlockHamiltonian& h, double energy, double eta,
                                const DecimationOptions& opts = {});

/// Full retarded Green's function of the open device (dense inversion).
Eigen::MatrixXcd device_green_dense(const BlockHamiltonian& h, const SelfEnergies& se, double energy, double eta);

/// Tr[Ga Gr Gb Gr^dagger] for two broadening matrices given in full-device
/// coordinates; exposed so callers can check reciprocity.
double caroli_trace(const Eigen::MatrixXcd& g, const Eigen::MatrixXcd& gamma_a, const Eigen::MatrixXcd& gamma_b);

/// T(E) through dense inversion of the whole device.
double transmission(const BlockHamiltonian& h, double energy, double eta, const DecimationOptions& opts = {});
double transmission(const BlockHamiltonian& h, const SelfEnergies& se, double energy, double eta);

/// T(E) through a forward recursive sweep over the layer blocks; linear in
/// the number of layers.
double rgf_transmission(const BlockHamiltonian& h, double energy, double eta, const DecimationOptions& opts = {});
double rgf_transmission(const BlockHamiltonian& h, const SelfEnergies& se, double energy, double eta);

struct TransmissionSpectrum {
    EnergyGrid grid;
    std::vector<double> values;
    double bias = 0.0;
    Fingerprint device;
};

/// T(E) on a grid; energies are independent and evaluated on `threads`
/// workers (0 = hardware concurrency). Output does not depend on threads.
TransmissionSpectrum transmission_spectrum(const BlockHamiltonian& h, const EnergyGrid& grid, double bias,
                                           const Fingerprint& device, int threads = 1,
                                           const DecimationOptions& opts = {});

/// LDOS_i(E) = -Im G_ii(E) / pi, values(i, e) for site i, energy index e.
struct LdosTable {
    EnergyGrid grid;
    Eigen::MatrixXd values;
};

LdosTable ldos(const BlockHamiltonian& h, const EnergyGrid& grid, int threads = 1, const DecimationOptions& opts = {});

/// Diagonal of the device Green's function at one energy (recursive sweep).
Eigen::VectorXcd green_diagonal(const BlockHamiltonian& h, double energy, double eta, const DecimationOptions& opts = {});

/// Sites used for LDOS comparisons: the channel atom whose normal is most
/// rotated (only on a bent device) and the channel atom closest to the left
/// lead. Ties go to the atom nearest the ribbon centre line, then lower index.
struct SamplingAtoms {
    int far = -1;
    int arc = -1;  ///< -1 on a flat device
};

SamplingAtoms sampling_atoms(const DeviceGeometry& geom);

/// max_E |a - b| / max_E |b| over the energies with lo <= |E| <= hi.
double relative_deviation(const std::vector<double>& energies, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                          double lo, double hi);

}  // namespace stepgnr

#endif
