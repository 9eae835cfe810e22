#include "stepgnr/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stepgnr {

void HoppingModel::validate() const {
    if (!(cutoff > 1.0 && cutoff < 1.3)) throw ValidationError("cutoff must lie in (1, 1.3) a_cc");
    if (!std::isfinite(v_pp_pi) || !std::isfinite(v_pp_sigma) || !std::isfinite(decay_beta))
        throw ValidationError("hopping parameters must be finite");
    if (decay_beta < 0.0) throw ValidationError("decay_beta must be >= 0");
    if (!(edge_enhancement > -1.0)) throw ValidationError("edge_enhancement must be > -1");
}

double hopping(const AtomSite& site_i, const AtomSite& site_j, const HoppingModel& model, double a_cc) {
    const Vec3 d = site_j.position - site_i.position;
    const double dist = d.norm();
    if (dist > model.cutoff * a_cc || dist == 0.0)
        throw std::invalid_argument("hopping requested for a pair at " + std::to_string(dist) + " nm, outside cutoff");
    const Vec3 u = d / dist;
    const double ni_d = site_i.normal.dot(u);
    const double nj_d = site_j.normal.dot(u);
    const double sigma_part = ni_d * nj_d;
    const double pi_part = site_i.normal.dot(site_j.normal) - sigma_part;
    double t = (model.v_pp_sigma * sigma_part + model.v_pp_pi * pi_part) *
               std::exp(-model.decay_beta * (dist / a_cc - 1.0));
    if (model.edge_enhancement != 0.0 && site_i.edge && site_j.edge && site_i.dimer_line == site_j.dimer_line)
        t *= 1.0 + model.edge_enhancement;
    return t;
}

BiasRamp::BiasRamp(double v_b, double channel_begin, double channel_end, double fermi)
    : v_b_(v_b), begin_(channel_begin), end_(channel_end), fermi_(fermi) {
    if (!(channel_end > channel_begin)) throw ValidationError("bias ramp needs channel_end > channel_begin");
}

BiasRamp BiasRamp::for_device(const RibbonSpec& spec, double v_b, double fermi) {
    return BiasRamp(v_b, spec.channel_begin(), spec.channel_end(), fermi);
}

double BiasRamp::shift_at(double axial) const {
    if (axial <= begin_) return left_shift();
    if (axial >= end_) return right_shift();
    return 0.5 * v_b_ - v_b_ * (axial - begin_) / (end_ - begin_);
}

double BiasRamp::shift(const AtomSite& site) const {
    switch (site.region) {
    case Region::LeftLead: return left_shift();
    case Region::RightLead: return right_shift();
    case Region::Channel: break;
    }
    return shift_at(site.axial);
}

Eigen::MatrixXd BlockHamiltonian::dense() const {
    const int n = layer_size();
    const int layers = layer_count();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n * layers, n * layers);
    for (int l = 0; l < layers; ++l) {
        h.block(l * n, l * n, n, n) = onsite[l];
        if (l + 1 < layers) {
            h.block(l * n, (l + 1) * n, n, n) = coupling[l];
            h.block((l + 1) * n, l * n, n, n) = coupling[l].transpose();
        }
    }
    return h;
}

namespace {

BlockHamiltonian assemble_blocks(const DeviceGeometry& geom, const HoppingModel& model, const BiasRamp& bias) {
    const int n = geom.layer_size();
    const int layers = geom.layer_count();
    BlockHamiltonian h;
    h.onsite.assign(layers, Eigen::MatrixXd::Zero(n, n));
    h.coupling.assign(std::max(0, layers - 1), Eigen::MatrixXd::Zero(n, n));

    for (int i = 0; i < static_cast<int>(geom.sites.size()); ++i) {
        const auto& s = geom.sites[i];
        h.onsite[s.layer](i % n, i % n) = bias.shift(s);
    }
    for (const auto& b : geom.bonds) {
        int i = b.i, j = b.j;
        const auto& si = geom.sites[i];
        const auto& sj = geom.sites[j];
        const double t = hopping(si, sj, model, geom.spec.a_cc);
        if (si.layer == sj.layer) {
            h.onsite[si.layer](i % n, j % n) = t;
            h.onsite[si.layer](j % n, i % n) = t;
            continue;
        }
        if (std::abs(si.layer - sj.layer) != 1) {
            throw ValidationError("bond " + std::to_string(i) + "-" + std::to_string(j) + " spans layers " +
                                  std::to_string(si.layer) + " and " + std::to_string(sj.layer));
        }
        if (si.layer > sj.layer) std::swap(i, j);
        const int lower = std::min(si.layer, sj.layer);
        h.coupling[lower](i % n, j % n) = t;
    }
    return h;
}

}  // namespace

LeadBlocks flat_lead(const RibbonSpec& spec, const HoppingModel& model) {
    RibbonSpec cell = spec;
    cell.n_cells_channel = 1;
    cell.n_cells_lead = 1;
    const DeviceGeometry g = build_flat_ribbon(cell);
    const BlockHamiltonian h = assemble_blocks(g, model, BiasRamp::for_device(cell, 0.0));
    return {h.onsite[1], h.coupling[1]};
}

BlockHamiltonian assemble(const DeviceGeometry& geom, const HoppingModel& model, const BiasRamp& bias) {
    model.validate();
    BlockHamiltonian h = assemble_blocks(geom, model, bias);
    const LeadBlocks lead = flat_lead(geom.spec, model);
    const auto id = Eigen::MatrixXd::Identity(lead.onsite.rows(), lead.onsite.cols());
    h.left_lead = {lead.onsite + bias.left_shift() * id, lead.coupling};
    h.right_lead = {lead.onsite + bias.right_shift() * id, lead.coupling};
    return h;
}

std::vector<Eigen::VectorXd> bloch_bands(const LeadBlocks& lead, std::span<const double> phases) {
    std::vector<Eigen::VectorXd> bands;
    bands.reserve(phases.size());
    const Eigen::MatrixXcd h00 = lead.onsite.cast<std::complex<double>>();
    const Eigen::MatrixXcd h01 = lead.coupling.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
    for (double k : phases) {
        const std::complex<double> ph = std::polar(1.0, k);
        const Eigen::MatrixXcd hk = h00 + ph * h01 + std::conj(ph) * h01.adjoint();
        solver.compute(hk, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) throw NumericalError("band eigensolver failed");
        bands.push_back(solver.eigenvalues());
    }
    return bands;
}

namespace {

std::vector<double> phase_grid(int n_k) {
    std::vector<double> k(n_k);
    for (int i = 0; i < n_k; ++i) k[i] = std::numbers::pi * i / (n_k - 1);
    return k;
}

int count_crossings(const std::vector<Eigen::VectorXd>& bands, double energy) {
    int modes = 0;
    Eigen::Index prev = (bands.front().array() < energy).count();
    for (std::size_t i = 1; i < bands.size(); ++i) {
        const Eigen::Index cur = (bands[i].array() < energy).count();
        modes += static_cast<int>(std::abs(cur - prev));
        prev = cur;
    }
    return modes;
}

}  // namespace

double band_gap(const LeadBlocks& lead, int n_k) {
    const auto k = phase_grid(n_k);
    const auto bands = bloch_bands(lead, k);
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& e : bands) {
        const Eigen::Index below = (e.array() < 0.0).count();
        if (below == 0 || below == e.size()) continue;
        gap = std::min(gap, e(below) - e(below - 1));
    }
    return gap;
}

int mode_count(const LeadBlocks& lead, double energy, int n_k) {
    return mode_counts(lead, std::span<const double>(&energy, 1), n_k).front();
}

std::vector<int> mode_counts(const LeadBlocks& lead, std::span<const double> energies, int n_k) {
    const auto k = phase_grid(n_k);
    const auto bands = bloch_bands(lead, k);
    std::vector<int> out;
    out.reserve(energies.size());
    for (double energy : energies) out.push_back(count_crossings(bands, energy));
    return out;
}

std::vector<double> band_edges(const LeadBlocks& lead, int n_k) {
    const auto k = phase_grid(n_k);
    const auto bands = bloch_bands(lead, k);
    std::vector<double> edges;
    const Eigen::Index nb = bands.front().size();
    for (Eigen::Index b = 0; b < nb; ++b) {
        edges.push_back(bands.front()(b));
        edges.push_back(bands.back()(b));
        for (std::size_t i = 1; i + 1 < bands.size(); ++i) {
            const double l = bands[i - 1](b), c = bands[i](b), r = bands[i + 1](b);
            if ((c - l) * (r - c) <= 0.0) edges.push_back(c);
        }
    }
    std::sort(edges.begin(), edges.end());
    // flat bands report every grid point as an extremum
    edges.erase(std::unique(edges.begin(), edges.end(), [](double a, double b) { return b - a < 1e-9; }), edges.end());
    return edges;
}

}  // namespace stepgnr
