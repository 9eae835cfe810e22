#include "stepgnr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace stepgnr {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string fmt_nm(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

void RibbonSpec::validate() const {
    if (n_a < 2) throw ValidationError("n_a must be >= 2 (got " + std::to_string(n_a) + ")");
    if (n_cells_channel < 1)
        throw ValidationError("n_cells_channel must be >= 1 (got " + std::to_string(n_cells_channel) + ")");
    if (n_cells_lead < 1)
        throw ValidationError("n_cells_lead must be >= 1 (got " + std::to_string(n_cells_lead) + ")");
    if (!(a_cc > 0.0) || !std::isfinite(a_cc)) throw ValidationError("a_cc must be > 0 (got " + fmt_nm(a_cc) + ")");
}

double RibbonSpec::width() const { return (n_a - 1) * (std::sqrt(3.0) / 2.0) * a_cc; }

double RibbonSpec::channel_begin() const { return n_cells_lead * cell_length() - 0.25 * a_cc; }

double RibbonSpec::channel_end() const { return channel_begin() + channel_length(); }

std::string FamilyInfo::label() const {
    switch (family) {
    case Family::ThreeP: return "3p";
    case Family::ThreePPlusOne: return "3p+1";
    case Family::ThreePPlusTwo: return "3p+2";
    }
    return "?";
}

FamilyInfo classify_family(int n_a) {
    const int r = n_a % 3;
    const int p = n_a / 3;
    switch (r) {
    case 0: return {Family::ThreeP, p, false};
    case 1: return {Family::ThreePPlusOne, p, true};
    default: return {Family::ThreePPlusTwo, p, false};
    }
}

double BendProfile::effective_angle_rad() const { return effective_angle_deg * kDeg; }

double BendProfile::effective_height() const {
    const double th = effective_angle_rad();
    return 2.0 * curvature_radius * (1.0 - std::cos(th)) + incline_length * std::sin(th);
}

BendProfile::Point BendProfile::at(double u) const {
    if (u <= 0.0) return {u, 0.0, 0.0};
    const double r = curvature_radius;
    const double th = effective_angle_rad();
    const double ls = sheet_arc_length();
    const double k = chord_stretch;
    const double l_inc = incline_length;

    if (u < ls) {
        const double phi = k * u / r;
        return {r * std::sin(phi), r * (1.0 - std::cos(phi)), phi};
    }
    const double top_z = r * std::sin(th) + l_inc * std::cos(th);
    const double top_y = r * (1.0 - std::cos(th)) + l_inc * std::sin(th);
    if (u < ls + l_inc) {
        const double w = u - ls;
        return {r * std::sin(th) + w * std::cos(th), r * (1.0 - std::cos(th)) + w * std::sin(th), th};
    }
    // second arc, concave down, centre below-right of the incline end
    const double cz = top_z + r * std::sin(th);
    const double cy = top_y - r * std::cos(th);
    if (u < 2.0 * ls + l_inc) {
        const double psi = th - k * (u - ls - l_inc) / r;
        return {cz - r * std::sin(psi), cy + r * std::cos(psi), psi};
    }
    return {cz + (u - sheet_step_length()), effective_height(), 0.0};
}

BendProfile resolve_profile(double step_height, double curvature_radius, double bend_angle_deg,
                            double channel_length, double a_cc) {
    if (!std::isfinite(step_height) || step_height < 0.0)
        throw ValidationError("step_height must be >= 0 nm (got " + fmt_nm(step_height) + ")");
    if (!std::isfinite(curvature_radius) || curvature_radius <= 0.0)
        throw ValidationError("curvature_radius must be > 0 nm (got " + fmt_nm(curvature_radius) + ")");
    if (!std::isfinite(bend_angle_deg) || bend_angle_deg < 0.0 || bend_angle_deg > 90.0)
        throw ValidationError("bend_angle must lie in (0, 90] degrees (got " + fmt_nm(bend_angle_deg) + ")");
    if (bend_angle_deg == 0.0 && step_height > 0.0)
        throw ValidationError("bend_angle must be > 0 when step_height > 0");
    if (!(channel_length > 0.0)) throw ValidationError("channel length must be > 0 nm");
    if (2.0 * curvature_radius <= a_cc)
        throw ValidationError("curvature_radius must exceed a_cc / 2 (got " + fmt_nm(curvature_radius) + " nm)");

    BendProfile p;
    p.step_height = step_height;
    p.curvature_radius = curvature_radius;
    p.bend_angle_deg = bend_angle_deg;
    p.channel_length = channel_length;

    const double theta = bend_angle_deg * kDeg;
    const double arc_rise = 2.0 * curvature_radius * (1.0 - std::cos(theta));
    double theta_eff = theta;
    if (step_height < arc_rise) {
        theta_eff = std::acos(1.0 - step_height / (2.0 * curvature_radius));
        p.clamped = true;
        p.incline_length = 0.0;
        std::ostringstream msg;
        msg << "theta_eff = " << fmt_nm(theta_eff / kDeg) << " deg replaces bend_angle = " << fmt_nm(bend_angle_deg)
            << " deg: H = " << fmt_nm(step_height) << " nm is below 2 CR (1 - cos theta) = " << fmt_nm(arc_rise)
            << " nm for CR = " << fmt_nm(curvature_radius) << " nm";
        p.warning = msg.str();
    } else if (theta > 0.0) {
        p.incline_length = (step_height - arc_rise) / std::sin(theta);
    }
    p.effective_angle_deg = theta_eff / kDeg;
    p.arc_length = curvature_radius * theta_eff;
    p.chord_stretch = (2.0 * curvature_radius / a_cc) * std::asin(a_cc / (2.0 * curvature_radius));

    const double used = p.sheet_step_length();
    if (used > channel_length) {
        throw ValidationError("profile too long: step needs " + fmt_nm(used) + " nm of sheet but the channel is " +
                              fmt_nm(channel_length) + " nm");
    }
    p.flat_margin = 0.5 * (channel_length - used);
    return p;
}

const char* to_string(Sublattice s) { return s == Sublattice::A ? "A" : "B"; }

const char* to_string(Region r) {
    switch (r) {
    case Region::LeftLead: return "left-lead";
    case Region::Channel: return "channel";
    case Region::RightLead: return "right-lead";
    }
    return "?";
}

std::vector<Bond> find_bonds(const std::vector<AtomSite>& sites, int layer_size, double max_distance) {
    std::vector<Bond> bonds;
    const int n = static_cast<int>(sites.size());
    for (int i = 0; i < n; ++i) {
        const int layer = i / layer_size;
        const int stop = std::min(n, (layer + 2) * layer_size);
        for (int j = i + 1; j < stop; ++j) {
            const double d = (sites[j].position - sites[i].position).norm();
            if (d <= max_distance) bonds.push_back({i, j, d});
        }
    }
    return bonds;
}

DeviceGeometry build_flat_ribbon(const RibbonSpec& spec) {
    spec.validate();
    DeviceGeometry g;
    g.spec = spec;
    const double a = spec.a_cc;
    const double dx = std::sqrt(3.0) / 2.0 * a;
    const int layers = spec.layer_count();
    g.sites.reserve(static_cast<std::size_t>(layers) * spec.atoms_per_cell());

    for (int l = 0; l < layers; ++l) {
        const double z0 = l * spec.cell_length();
        Region region = Region::Channel;
        if (l < spec.n_cells_lead) region = Region::LeftLead;
        else if (l >= spec.n_cells_lead + spec.n_cells_channel) region = Region::RightLead;

        for (int m = 0; m < spec.n_a; ++m) {
            const bool even = (m % 2 == 0);
            const double dz[2] = {even ? 0.0 : 1.5 * a, even ? a : 2.5 * a};
            for (int k = 0; k < 2; ++k) {
                AtomSite s;
                s.position = Vec3(m * dx, 0.0, z0 + dz[k]);
                s.normal = Vec3(0.0, 1.0, 0.0);
                s.sublattice = k == 0 ? Sublattice::A : Sublattice::B;
                s.layer = l;
                s.region = region;
                s.dimer_line = m;
                s.edge = (m == 0 || m == spec.n_a - 1);
                s.axial = s.position.z();
                g.sites.push_back(s);
            }
        }
    }
    g.bonds = find_bonds(g.sites, spec.atoms_per_cell(), 1.1 * a);
    return g;
}

DeviceGeometry apply_step_deformation(const DeviceGeometry& flat, const BendProfile& profile) {
    if (flat.profile) throw ValidationError("apply_step_deformation expects a flat geometry");
    const RibbonSpec& spec = flat.spec;
    const double length = spec.channel_length();
    if (std::abs(profile.channel_length - length) > 1e-12 * length) {
        throw ValidationError("profile was resolved against a " + fmt_nm(profile.channel_length) +
                              " nm channel, geometry has " + fmt_nm(length) + " nm");
    }

    DeviceGeometry out = flat;
    out.profile = profile;
    if (profile.is_flat()) return out;

    const double centre = 0.5 * (spec.channel_begin() + spec.channel_end());
    const double start = centre - 0.5 * profile.sheet_step_length();
    const double stop = start + profile.sheet_step_length();
    const double slack = 1e-12 * length;
    if (start < spec.channel_begin() - slack || stop > spec.channel_end() + slack)
        throw ValidationError("step profile would deform the lead region");

    for (auto& s : out.sites) {
        const double u = s.axial - start;
        if (s.region == Region::LeftLead || u <= 0.0) continue;
        const auto p = profile.at(u);
        s.position = Vec3(s.position.x(), p.dy, start + p.dz);
        s.normal = p.angle == 0.0 ? Vec3(0.0, 1.0, 0.0) : Vec3(0.0, std::cos(p.angle), -std::sin(p.angle));
    }
    for (auto& b : out.bonds) b.length = (out.sites[b.j].position - out.sites[b.i].position).norm();
    return out;
}

DeviceGeometry build_device(const RibbonSpec& spec, const std::optional<BendProfile>& profile) {
    DeviceGeometry flat = build_flat_ribbon(spec);
    if (!profile) return flat;
    return apply_step_deformation(flat, *profile);
}

double max_bond_strain(const DeviceGeometry& geom) {
    double worst = 0.0;
    for (const auto& b : geom.bonds)
        worst = std::max(worst, std::abs(b.length - geom.spec.a_cc) / geom.spec.a_cc);
    return worst;
}

Fingerprint fingerprint(const DeviceGeometry& geom) {
    Fingerprint f;
    f.n_a = geom.spec.n_a;
    if (geom.profile) {
        f.step_height = geom.profile->step_height;
        f.curvature_radius = geom.profile->curvature_radius;
        f.effective_angle_deg = geom.profile->effective_angle_deg;
    }
    return f;
}

void export_xyz(const DeviceGeometry& geom, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    const Fingerprint f = fingerprint(geom);
    char line[160];
    out << geom.sites.size() << '\n';
    std::snprintf(line, sizeof line, "H=%.6f CR=%.6f theta_eff=%.6f n_a=%d", f.step_height, f.curvature_radius,
                  f.effective_angle_deg, f.n_a);
    out << line << '\n';
    for (const auto& s : geom.sites) {
        const Vec3 r = 10.0 * s.position;  // nm -> Angstrom
        std::snprintf(line, sizeof line, "C %.8f %.8f %.8f", r.x(), r.y(), r.z());
        out << line << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<Vec3> read_xyz(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::size_t n = 0;
    std::string line;
    if (!std::getline(in, line) || !(std::istringstream(line) >> n)) throw IoError(path.string() + ": bad atom count");
    std::getline(in, line);
    std::vector<Vec3> pos;
    pos.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string element;
        double x, y, z;
        if (!std::getline(in, line) || !(std::istringstream(line) >> element >> x >> y >> z))
            throw IoError(path.string() + ": truncated at atom " + std::to_string(i));
        pos.emplace_back(x / 10.0, y / 10.0, z / 10.0);
    }
    return pos;
}

}  // namespace stepgnr
