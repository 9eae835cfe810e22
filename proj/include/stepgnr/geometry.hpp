#ifndef STEPGNR_GEOMETRY_HPP
#define STEPGNR_GEOMETRY_HPP

#include "stepgnr/errors.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace stepgnr {

using Vec3 = Eigen::Vector3d;

/// Standard graphene C-C bond length (nm).
inline constexpr double kDefaultBondLength = 0.142;

/*
 * Armchair ribbon layout used throughout the library:
 *
 *   x  across the width, dimer line m sits at x = m * sqrt(3)/2 * a_cc
 *   y  out of plane (flat ribbon normal is +y)
 *   z  transport axis, one translational cell is 3 * a_cc long
 *
 * Even lines hold atoms at z = 0 and a_cc, odd lines at 1.5 and 2.5 a_cc
 * (relative to the cell origin). Every cell lists its atoms in the same
 * order, so per-layer blocks of the Hamiltonian line up with the lead cell.
 */
struct RibbonSpec {
    int n_a = 0;              ///< dimer lines across the width
    int n_cells_channel = 0;  ///< channel length in unit cells
    int n_cells_lead = 1;     ///< lead cells kept inside the device on each side
    double a_cc = kDefaultBondLength;

    /// Throws ValidationError naming the first violated bound.
    void validate() const;

    double width() const;
    double cell_length() const { return 3.0 * a_cc; }
    double channel_length() const { return n_cells_channel * cell_length(); }
    int atoms_per_cell() const { return 2 * n_a; }
    int layer_count() const { return n_cells_channel + 2 * n_cells_lead; }
    /// Flat transport coordinate where the channel begins / ends (midway
    /// between the last lead atom and the first channel atom).
    double channel_begin() const;
    double channel_end() const;
};

enum class Family { ThreeP, ThreePPlusOne, ThreePPlusTwo };

struct FamilyInfo {
    Family family;
    int p;
    bool max_gap;  ///< 3p+1 is the maximum band-gap family
    std::string label() const;
};

FamilyInfo classify_family(int n_a);

/// Two-arc step: arc up (radius CR, angle theta), straight incline, arc down.
struct BendProfile {
    double step_height = 0.0;       ///< requested H (nm)
    double curvature_radius = 0.0;  ///< CR (nm)
    double bend_angle_deg = 0.0;    ///< requested theta (degrees)
    double effective_angle_deg = 0.0;
    bool clamped = false;
    std::string warning;

    double arc_length = 0.0;      ///< CR * theta_eff, length of one arc curve (nm)
    double incline_length = 0.0;  ///< straight section between the arcs (nm)
    double flat_margin = 0.0;     ///< untouched channel length on each side (nm)
    double channel_length = 0.0;  ///< channel length the profile was resolved against

    /// Sheet length consumed by one arc. Atoms on an arc are spread by
    /// chord_stretch so that axial bonds keep their length as chords.
    double chord_stretch = 1.0;
    double sheet_arc_length() const { return arc_length / chord_stretch; }
    double sheet_step_length() const { return 2.0 * sheet_arc_length() + incline_length; }

    double effective_angle_rad() const;
    /// Realized rise 2 CR (1 - cos theta_eff) + L_inc sin theta_eff.
    double effective_height() const;
    bool is_flat() const { return effective_angle_deg == 0.0; }

    struct Point {
        double dz;     ///< horizontal advance from step start
        double dy;     ///< rise
        double angle;  ///< tangent angle w.r.t. +z (radians)
    };
    /// Profile curve evaluated at sheet distance u from the step start.
    /// u <= 0 is the lower flat, u >= sheet_step_length() the upper flat.
    Point at(double u) const;
};

/// Resolves (H, CR, theta) against a channel length. Infeasible triples
/// (H < 2 CR (1 - cos theta)) are clamped to theta_eff = acos(1 - H / 2CR)
/// with a warning. Throws ValidationError for nonpositive input or when the
/// step does not fit in the channel.
BendProfile resolve_profile(double step_height, double curvature_radius, double bend_angle_deg,
                            double channel_length, double a_cc = kDefaultBondLength);

enum class Sublattice { A, B };
enum class Region { LeftLead, Channel, RightLead };

const char* to_string(Sublattice s);
const char* to_string(Region r);

struct AtomSite {
    Vec3 position;
    Vec3 normal;
    Sublattice sublattice = Sublattice::A;
    int layer = 0;
    Region region = Region::Channel;
    int dimer_line = 0;
    bool edge = false;   ///< on the first or last dimer line
    double axial = 0.0;  ///< transport coordinate of the undeformed sheet (nm)
};

struct Bond {
    int i = 0;
    int j = 0;
    double length = 0.0;
};

struct DeviceGeometry {
    RibbonSpec spec;
    std::optional<BendProfile> profile;
    std::vector<AtomSite> sites;
    std::vector<Bond> bonds;

    int layer_count() const { return spec.layer_count(); }
    int layer_size() const { return spec.atoms_per_cell(); }
    /// Index of the first site of a layer; sites are stored layer-major.
    int layer_offset(int layer) const { return layer * layer_size(); }
};

DeviceGeometry build_flat_ribbon(const RibbonSpec& spec);

/// Maps every channel atom onto the step profile, keeping the sheet
/// coordinate along the curve. Lead atoms on the left stay where they are;
/// the right lead is carried rigidly to the top of the step.
DeviceGeometry apply_step_deformation(const DeviceGeometry& flat, const BendProfile& profile);

/// Convenience: flat ribbon, optionally deformed by (H, CR, theta).
DeviceGeometry build_device(const RibbonSpec& spec, const std::optional<BendProfile>& profile);

/// Bonds between atoms closer than cutoff * a_cc, searched only across
/// the same and adjacent layers.
std::vector<Bond> find_bonds(const std::vector<AtomSite>& sites, int layer_size, double max_distance);

/// Largest |bond length - a_cc| / a_cc.
double max_bond_strain(const DeviceGeometry& geom);

/// (H, CR, theta_eff, n_a) that identify a device in output files.
struct Fingerprint {
    double step_height = 0.0;
    double curvature_radius = 0.0;
    double effective_angle_deg = 0.0;
    int n_a = 0;
};

Fingerprint fingerprint(const DeviceGeometry& geom);

void export_xyz(const DeviceGeometry& geom, const std::filesystem::path& path);
/// Positions in nm read back from an XYZ file written by export_xyz.
std::vector<Vec3> read_xyz(const std::filesystem::path& path);

}  // namespace stepgnr

#endif
