#ifndef STEPGNR_MODEL_HPP
#define STEPGNR_MODEL_HPP

#include "stepgnr/geometry.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace stepgnr {

/// Two-center p-orbital hopping along local surface normals.
///
/// t = [Vsigma (ni.d)(nj.d) + Vpi (ni.nj - (ni.d)(nj.d))] exp(-beta (d/a_cc - 1))
///
/// On a flat sheet both normals are perpendicular to every bond and t is
/// Vpi. Bending tilts the normals towards the bond direction and mixes in
/// the sigma integral.
struct HoppingModel {
    double v_pp_pi = -2.7;    ///< eV
    double v_pp_sigma = 4.7;  ///< eV
    double decay_beta = 3.0;
    double cutoff = 1.1;  ///< in units of a_cc
    /// Relative enhancement of bonds along the ribbon edges; 0 keeps the
    /// plain nearest-neighbour model.
    double edge_enhancement = 0.0;

    void validate() const;
};

/// Hopping between two sites in eV. Throws std::invalid_argument when the
/// pair lies beyond the cutoff.
double hopping(const AtomSite& site_i, const AtomSite& site_j, const HoppingModel& model,
               double a_cc = kDefaultBondLength);

/// Electrostatic shift across the device for a bias v_b (V):
/// mu_L = E_F + v_b / 2, mu_R = E_F - v_b / 2. The left lead is raised by
/// v_b / 2, the right lowered by v_b / 2, and the channel follows a linear
/// ramp in the sheet coordinate between the two channel boundaries.
class BiasRamp {
public:
    BiasRamp() = default;
    BiasRamp(double v_b, double channel_begin, double channel_end, double fermi = 0.0);
    static BiasRamp for_device(const RibbonSpec& spec, double v_b, double fermi = 0.0);

    double bias() const { return v_b_; }
    double fermi() const { return fermi_; }
    double mu_left() const { return fermi_ + 0.5 * v_b_; }
    double mu_right() const { return fermi_ - 0.5 * v_b_; }
    double left_shift() const { return 0.5 * v_b_; }
    double right_shift() const { return -0.5 * v_b_; }
    /// Onsite shift (eV) for a site.
    double shift(const AtomSite& site) const;
    double shift_at(double axial) const;

private:
    double v_b_ = 0.0;
    double begin_ = 0.0;
    double end_ = 1.0;
    double fermi_ = 0.0;
};

/// Principal layer of a semi-infinite lead. coupling is <n|H|n+1>.
struct LeadBlocks {
    Eigen::MatrixXd onsite;
    Eigen::MatrixXd coupling;
};

/// Block-tridiagonal device Hamiltonian (eV). coupling[i] is <i|H|i+1>.
/// The left lead attaches to layer 0 through left_lead.coupling, the right
/// lead to the last layer through right_lead.coupling.
struct BlockHamiltonian {
    std::vector<Eigen::MatrixXd> onsite;
    std::vector<Eigen::MatrixXd> coupling;
    LeadBlocks left_lead;
    LeadBlocks right_lead;

    int layer_count() const { return static_cast<int>(onsite.size()); }
    int layer_size() const { return onsite.empty() ? 0 : static_cast<int>(onsite.front().rows()); }
    int orbital_count() const { return layer_count() * layer_size(); }
    /// Full matrix, for checks and the dense transport path.
    Eigen::MatrixXd dense() const;
};

/// Flat-lead principal layer for a ribbon, unshifted.
LeadBlocks flat_lead(const RibbonSpec& spec, const HoppingModel& model);

BlockHamiltonian assemble(const DeviceGeometry& geom, const HoppingModel& model, const BiasRamp& bias);

/// Eigenvalues of H(k) = H00 + H01 e^{ik} + H01^T e^{-ik}, sorted ascending,
/// one vector per phase k (in units of the cell length).
std::vector<Eigen::VectorXd> bloch_bands(const LeadBlocks& lead, std::span<const double> phases);

/// Smallest direct gap around zero energy over a k grid on [0, pi].
double band_gap(const LeadBlocks& lead, int n_k = 401);

/// Right-moving propagating modes at energy e, counted as crossings of the
/// band structure on a dense [0, pi] grid.
int mode_count(const LeadBlocks& lead, double energy, int n_k = 2001);
/// Same count for many energies from one band-structure evaluation.
std::vector<int> mode_counts(const LeadBlocks& lead, std::span<const double> energies, int n_k = 2001);

/// Band energies at k = 0 and k = pi plus all band extrema found on the
/// grid; transmission of a pristine ribbon is a step function with steps here.
std::vector<double> band_edges(const LeadBlocks& lead, int n_k = 2001);

}  // namespace stepgnr

#endif
