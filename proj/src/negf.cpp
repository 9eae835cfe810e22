#include "stepgnr/negf.hpp"

#include "stepgnr/parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace stepgnr {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;

namespace {

constexpr double kNegativeTolerance = 1e-10;

std::string where(double energy, double eta) {
    std::ostringstream s;
    s.precision(10);
    s << "E = " << energy << " eV, eta = " << eta << " eV";
    return s.str();
}

MatrixXcd invert(const MatrixXcd& a, double energy, double eta) {
    MatrixXcd inv = a.partialPivLu().inverse();
    if (!inv.allFinite()) throw NumericalError("singular linear solve at " + where(energy, eta));
    return inv;
}

// The left-connected blocks are evaluated at real E, and sublattice symmetry
// can make them exactly singular (E = 0 in a gap gives rcond ~ 1e-50) even
// though the open device is regular. Callers then fall back to a pivoted
// solve of the whole device.
constexpr double kRgfMinRcond = 1e-10;

bool invert_well_conditioned(const MatrixXcd& a, MatrixXcd& inv) {
    const Eigen::PartialPivLU<MatrixXcd> lu(a);
    if (!(lu.rcond() >= kRgfMinRcond)) return false;
    inv = lu.inverse();
    return true;
}

double clip_nonnegative(double value, const char* what, double energy, double eta) {
    if (!std::isfinite(value)) throw NumericalError(std::string(what) + " is not finite at " + where(energy, eta));
    if (value < -kNegativeTolerance) {
        std::ostringstream s;
        s << what << " = " << value << " < 0 at " << where(energy, eta);
        throw NumericalError(s.str());
    }
    return std::max(0.0, value);
}

}  // namespace

void EnergyGrid::validate() const {
    if (!(e_min < e_max)) throw ValidationError("energy grid needs e_min < e_max");
    if (n_points < 2) throw ValidationError("energy grid needs n_points >= 2");
    if (!(eta > 0.0)) throw ValidationError("eta must be > 0");
}

double EnergyGrid::at(int i) const {
    if (i == n_points - 1) return e_max;
    return e_min + (e_max - e_min) * i / (n_points - 1);
}

std::vector<double> EnergyGrid::energies() const {
    std::vector<double> e(n_points);
    for (int i = 0; i < n_points; ++i) e[i] = at(i);
    return e;
}

SurfaceGreen surface_gf(const LeadBlocks& lead, double energy, double eta, const DecimationOptions& opts) {
    if (!(opts.tol > 0.0)) throw ValidationError("decimation tol must be > 0");
    const Eigen::Index n = lead.onsite.rows();
    const MatrixXcd z = cplx(energy, eta) * MatrixXcd::Identity(n, n);

    MatrixXcd alpha = lead.coupling.cast<cplx>();
    MatrixXcd beta = alpha.adjoint();
    MatrixXcd eps = lead.onsite.cast<cplx>();
    MatrixXcd eps_right = eps;  // surface of the lead extending to +infinity
    MatrixXcd eps_left = eps;   // surface of the lead extending to -infinity
    MatrixXcd g(n, n), ag(n, n), bg(n, n), agb(n, n), bga(n, n), tmp(n, n);

    auto coupling_norm = [&] { return std::max(alpha.cwiseAbs().maxCoeff(), beta.cwiseAbs().maxCoeff()); };
    SurfaceGreen out;
    out.residual = n == 0 ? 0.0 : coupling_norm();
    while (out.residual >= opts.tol) {
        if (out.iterations >= opts.max_iter) {
            std::ostringstream s;
            s << "surface Green's function did not converge after " << opts.max_iter
              << " iterations at " << where(energy, eta) << " (residual " << out.residual << ")";
            throw ConvergenceError(s.str());
        }
        g = invert(z - eps, energy, eta);
        ag.noalias() = alpha * g;
        bg.noalias() = beta * g;
        agb.noalias() = ag * beta;
        bga.noalias() = bg * alpha;
        eps += agb + bga;
        eps_right += agb;
        eps_left += bga;
        tmp.noalias() = ag * alpha;
        alpha.swap(tmp);
        tmp.noalias() = bg * beta;
        beta.swap(tmp);
        ++out.iterations;
        out.residual = coupling_norm();
    }
    out.right = invert(z - eps_right, energy, eta);
    out.left = invert(z - eps_left, energy, eta);
    return out;
}

SelfEnergies self_energies(const MatrixXcd& gs_left, const MatrixXcd& gs_right, const MatrixXd& tau_left,
                           const MatrixXd& tau_right) {
    if (tau_left.cols() != gs_left.rows() || gs_left.rows() != gs_left.cols() || tau_right.cols() != gs_right.rows() ||
        gs_right.rows() != gs_right.cols()) {
        throw ValidationError("coupling and surface Green's function dimensions do not match");
    }
    SelfEnergies se;
    const MatrixXcd tl = tau_left.cast<cplx>();
    const MatrixXcd tr = tau_right.cast<cplx>();
    se.sigma_left = tl * gs_left * tl.adjoint();
    se.sigma_right = tr * gs_right * tr.adjoint();
    const cplx i(0.0, 1.0);
    se.gamma_left = i * (se.sigma_left - se.sigma_left.adjoint());
    se.gamma_right = i * (se.sigma_right - se.sigma_right.adjoint());
    return se;
}

SelfEnergies lead_self_energies(const BlockHamiltonian& h, double energy, double eta, const DecimationOptions& opts) {
    const MatrixXd tau_left = h.left_lead.coupling.transpose();
    const MatrixXd& tau_right = h.right_lead.coupling;
    const bool same = h.left_lead.onsite == h.right_lead.onsite && h.left_lead.coupling == h.right_lead.coupling;
    if (same) {
        const SurfaceGreen gs = surface_gf(h.left_lead, energy, eta, opts);
        return self_energies(gs.left, gs.right, tau_left, tau_right);
    }
    const SurfaceGreen gl = surface_gf(h.left_lead, energy, eta, opts);
    const SurfaceGreen gr = surface_gf(h.right_lead, energy, eta, opts);
    return self_energies(gl.left, gr.right, tau_left, tau_right);
}

namespace {

// Transmission paths evaluate the device at real energy: eta only enters
// through the lead surface Green's functions, so a clean ribbon transmits
// its modes without absorption in the scattering region.
MatrixXcd open_device_matrix(const BlockHamiltonian& h, const SelfEnergies& se, double energy) {
    const int n = h.layer_size();
    MatrixXcd a = -h.dense().cast<cplx>();
    a.diagonal().array() += energy;
    a.topLeftCorner(n, n) -= se.sigma_left;
    a.bottomRightCorner(n, n) -= se.sigma_right;
    return a;
}

}  // namespace

MatrixXcd device_green_dense(const BlockHamiltonian& h, const SelfEnergies& se, double energy, double eta) {
    return invert(open_device_matrix(h, se, energy), energy, eta);
}

double caroli_trace(const MatrixXcd& g, const MatrixXcd& gamma_a, const MatrixXcd& gamma_b) {
    return (gamma_a * g * gamma_b * g.adjoint()).trace().real();
}

double transmission(const BlockHamiltonian& h, const SelfEnergies& se, double energy, double eta) {
    const int n = h.layer_size();
    const int total = h.orbital_count();
    const MatrixXcd a = open_device_matrix(h, se, energy);
    MatrixXcd rhs = MatrixXcd::Zero(total, n);
    rhs.bottomRows(n).setIdentity();
    const MatrixXcd cols = a.partialPivLu().solve(rhs);
    if (!cols.allFinite()) throw NumericalError("singular linear solve at " + where(energy, eta));
    const MatrixXcd g_first_last = cols.topRows(n);
    const double t = (se.gamma_left * g_first_last * se.gamma_right * g_first_last.adjoint()).trace().real();
    return clip_nonnegative(t, "transmission", energy, eta);
}

double transmission(const BlockHamiltonian& h, double energy, double eta, const DecimationOptions& opts) {
    return transmission(h, lead_self_energies(h, energy, eta, opts), energy, eta);
}

double rgf_transmission(const BlockHamiltonian& h, const SelfEnergies& se, double energy, double eta) {
    const int layers = h.layer_count();
    const int n = h.layer_size();
    const MatrixXcd z = cplx(energy, 0.0) * MatrixXcd::Identity(n, n);

    MatrixXcd a = z - h.onsite[0].cast<cplx>() - se.sigma_left;
    if (layers == 1) a -= se.sigma_right;
    MatrixXcd gl;
    if (!invert_well_conditioned(a, gl)) return transmission(h, se, energy, eta);
    MatrixXcd g_j0 = gl;  // G(j, 0) of the left-connected system
    MatrixXcd tmp(n, n), down(n, n);

    for (int j = 1; j < layers; ++j) {
        const MatrixXcd up = h.coupling[j - 1].cast<cplx>();  // <j-1|H|j>
        down = up.adjoint();
        tmp.noalias() = down * gl;
        a = z - h.onsite[j].cast<cplx>();
        a.noalias() -= tmp * up;
        if (j == layers - 1) a -= se.sigma_right;
        if (!invert_well_conditioned(a, gl)) return transmission(h, se, energy, eta);
        tmp.noalias() = down * g_j0;
        g_j0.noalias() = gl * tmp;
    }
    const double t = (se.gamma_right * g_j0 * se.gamma_left * g_j0.adjoint()).trace().real();
    return clip_nonnegative(t, "transmission", energy, eta);
}

double rgf_transmission(const BlockHamiltonian& h, double energy, double eta, const DecimationOptions& opts) {
    return rgf_transmission(h, lead_self_energies(h, energy, eta, opts), energy, eta);
}

TransmissionSpectrum transmission_spectrum(const BlockHamiltonian& h, const EnergyGrid& grid, double bias,
                                           const Fingerprint& device, int threads, const DecimationOptions& opts) {
    grid.validate();
    TransmissionSpectrum spec{grid, std::vector<double>(grid.n_points), bias, device};
    parallel_for(grid.n_points, threads,
                 [&](int i) { spec.values[i] = rgf_transmission(h, grid.at(i), grid.eta, opts); });
    return spec;
}

Eigen::VectorXcd green_diagonal(const BlockHamiltonian& h, double energy, double eta, const DecimationOptions& opts) {
    const SelfEnergies se = lead_self_energies(h, energy, eta, opts);
    const int layers = h.layer_count();
    const int n = h.layer_size();
    const MatrixXcd z = cplx(energy, eta) * MatrixXcd::Identity(n, n);

    // sigma_from_left[j]: everything left of layer j folded onto it, likewise right
    std::vector<MatrixXcd> from_left(layers), from_right(layers);
    from_left[0] = se.sigma_left;
    for (int j = 1; j < layers; ++j) {
        const MatrixXcd up = h.coupling[j - 1].cast<cplx>();
        const MatrixXcd g = invert(z - h.onsite[j - 1].cast<cplx>() - from_left[j - 1], energy, eta);
        from_left[j] = up.adjoint() * g * up;
    }
    from_right[layers - 1] = se.sigma_right;
    for (int j = layers - 2; j >= 0; --j) {
        const MatrixXcd up = h.coupling[j].cast<cplx>();
        const MatrixXcd g = invert(z - h.onsite[j + 1].cast<cplx>() - from_right[j + 1], energy, eta);
        from_right[j] = up * g * up.adjoint();
    }
    Eigen::VectorXcd diag(static_cast<Eigen::Index>(layers) * n);
    for (int j = 0; j < layers; ++j) {
        const MatrixXcd g = invert(z - h.onsite[j].cast<cplx>() - from_left[j] - from_right[j], energy, eta);
        diag.segment(static_cast<Eigen::Index>(j) * n, n) = g.diagonal();
    }
    return diag;
}

LdosTable ldos(const BlockHamiltonian& h, const EnergyGrid& grid, int threads, const DecimationOptions& opts) {
    grid.validate();
    LdosTable table{grid, MatrixXd(h.orbital_count(), grid.n_points)};
    parallel_for(grid.n_points, threads, [&](int e) {
        const double energy = grid.at(e);
        const Eigen::VectorXcd diag = green_diagonal(h, energy, grid.eta, opts);
        for (Eigen::Index i = 0; i < diag.size(); ++i)
            table.values(i, e) = clip_nonnegative(-diag(i).imag() / std::numbers::pi, "LDOS", energy, grid.eta);
    });
    return table;
}

SamplingAtoms sampling_atoms(const DeviceGeometry& geom) {
    constexpr double tie = 1e-9;
    const double mid = 0.5 * geom.spec.width();
    SamplingAtoms out;
    auto better = [&](int cand, int best, double key_cand, double key_best) {
        if (best < 0 || key_cand < key_best - tie) return true;
        if (key_cand > key_best + tie) return false;
        const double dc = std::abs(geom.sites[cand].position.x() - mid);
        const double db = std::abs(geom.sites[best].position.x() - mid);
        return dc < db - tie;
    };
    const bool bent = geom.profile && !geom.profile->is_flat();
    for (int i = 0; i < static_cast<int>(geom.sites.size()); ++i) {
        const auto& s = geom.sites[i];
        if (s.region != Region::Channel) continue;
        if (better(i, out.far, s.axial, out.far < 0 ? 0.0 : geom.sites[out.far].axial)) out.far = i;
        if (bent) {
            // minimise -rotation
            const double rot = -std::acos(std::clamp(s.normal.y(), -1.0, 1.0));
            const double best = out.arc < 0 ? 0.0 : -std::acos(std::clamp(geom.sites[out.arc].normal.y(), -1.0, 1.0));
            if (better(i, out.arc, rot, best)) out.arc = i;
        }
    }
    return out;
}

double relative_deviation(const std::vector<double>& energies, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                          double lo, double hi) {
    double num = 0.0, den = 0.0;
    for (std::size_t e = 0; e < energies.size(); ++e) {
        const double ae = std::abs(energies[e]);
        if (ae < lo || ae > hi) continue;
        num = std::max(num, std::abs(a(e) - b(e)));
        den = std::max(den, std::abs(b(e)));
    }
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace stepgnr
