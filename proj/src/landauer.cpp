#include "stepgnr/landauer.hpp"

#include "stepgnr/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace stepgnr {

namespace {

struct Leaf {
    double a, b;
    double fa, fm, fb;
    int depth;
    double coarse() const { return 0.5 * (b - a) * (fa + fb); }
    double fine() const { return 0.25 * (b - a) * (fa + 2.0 * fm + fb); }
    double error() const { return std::abs(fine() - coarse()); }
};

}  // namespace

Integration integrate_window(const std::function<double(double)>& f, double lo, double hi,
                             const QuadratureOptions& opts, int threads) {
    Integration out;
    if (lo == hi) return out;
    if (opts.initial_intervals < 1) throw ValidationError("quadrature needs at least one initial interval");
    if (!(opts.rel_tol > 0.0)) throw ValidationError("quadrature tolerance must be > 0");

    const int n0 = opts.initial_intervals;
    std::vector<double> x(2 * n0 + 1);
    for (int i = 0; i <= 2 * n0; ++i) x[i] = i == 2 * n0 ? hi : lo + (hi - lo) * i / (2.0 * n0);
    std::vector<double> fx(x.size());
    parallel_for(static_cast<int>(x.size()), threads, [&](int i) { fx[i] = f(x[i]); });
    out.evaluations = static_cast<int>(x.size());

    std::vector<Leaf> leaves;
    leaves.reserve(n0);
    for (int i = 0; i < n0; ++i)
        leaves.push_back({x[2 * i], x[2 * i + 2], fx[2 * i], fx[2 * i + 1], fx[2 * i + 2], 0});

    for (;;) {
        double value = 0.0, previous = 0.0, error = 0.0;
        for (const auto& l : leaves) {
            value += l.fine();
            previous += l.coarse();
            error += l.error();
        }
        out.value = value;
        out.previous = previous;
        if (error <= opts.rel_tol * std::max(std::abs(value), opts.abs_floor)) break;

        // bisect the fewest leaves carrying at least half of the error
        std::vector<int> order(leaves.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int p, int q) { return leaves[p].error() > leaves[q].error(); });
        std::vector<int> marked;
        double acc = 0.0;
        for (int idx : order) {
            if (acc >= 0.5 * error) break;
            if (leaves[idx].depth >= opts.max_depth) continue;
            marked.push_back(idx);
            acc += leaves[idx].error();
        }
        if (marked.empty() || out.evaluations + 2 * static_cast<int>(marked.size()) > opts.max_evaluations) {
            std::ostringstream s;
            s.precision(12);
            s << "adaptive quadrature on [" << lo << ", " << hi << "] did not converge: last estimates " << previous
              << " and " << value << " after " << out.evaluations << " evaluations";
            throw ConvergenceError(s.str());
        }
        std::sort(marked.begin(), marked.end());

        std::vector<double> q(2 * marked.size());
        for (std::size_t k = 0; k < marked.size(); ++k) {
            const Leaf& l = leaves[marked[k]];
            const double m = 0.5 * (l.a + l.b);
            q[2 * k] = 0.5 * (l.a + m);
            q[2 * k + 1] = 0.5 * (m + l.b);
        }
        std::vector<double> fq(q.size());
        parallel_for(static_cast<int>(q.size()), threads, [&](int i) { fq[i] = f(q[i]); });
        out.evaluations += static_cast<int>(q.size());

        std::vector<Leaf> next;
        next.reserve(leaves.size() + marked.size());
        std::size_t k = 0;
        for (int i = 0; i < static_cast<int>(leaves.size()); ++i) {
            const Leaf& l = leaves[i];
            if (k < marked.size() && marked[k] == i) {
                const double m = 0.5 * (l.a + l.b);
                next.push_back({l.a, m, l.fa, fq[2 * k], l.fm, l.depth + 1});
                next.push_back({m, l.b, l.fm, fq[2 * k + 1], l.fb, l.depth + 1});
                ++k;
            } else {
                next.push_back(l);
            }
        }
        leaves.swap(next);
    }

    out.min_step = std::numeric_limits<double>::infinity();
    for (const auto& l : leaves) {
        out.depth = std::max(out.depth, l.depth);
        out.min_step = std::min(out.min_step, 0.5 * (l.b - l.a));
    }
    return out;
}

CurrentResult current(const BlockHamiltonian& h, double v_b, const TransportOptions& opts) {
    CurrentResult r;
    if (v_b == 0.0) return r;
    const BiasRamp window(v_b, 0.0, 1.0);
    const double lo = std::min(window.mu_left(), window.mu_right());
    const double hi = std::max(window.mu_left(), window.mu_right());
    auto t = [&](double e) { return rgf_transmission(h, e, opts.eta, opts.decimation); };
    r.integral = integrate_window(t, lo, hi, opts.quadrature, opts.threads);
    const double sign = v_b > 0.0 ? 1.0 : -1.0;
    r.current = sign * kConductanceQuantum * r.integral.value;
    return r;
}

IVCurve iv_curve(const DeviceGeometry& geom, const HoppingModel& model, std::span<const double> biases,
                 const TransportOptions& opts) {
    for (std::size_t i = 1; i < biases.size(); ++i)
        if (!(biases[i] > biases[i - 1])) throw ValidationError("biases must be sorted and free of duplicates");

    IVCurve curve;
    curve.device = fingerprint(geom);
    curve.linear_response = opts.linear_response;
    curve.biases.assign(biases.begin(), biases.end());

    BlockHamiltonian frozen;
    if (opts.linear_response) frozen = assemble(geom, model, BiasRamp::for_device(geom.spec, 0.0));
    for (double v : biases) {
        CurrentResult r;
        if (opts.linear_response) {
            r = current(frozen, v, opts);
        } else {
            r = current(assemble(geom, model, BiasRamp::for_device(geom.spec, v)), v, opts);
        }
        curve.currents.push_back(r.current);
        curve.integration.push_back(r.integral);
    }
    return curve;
}

const char* to_string(SweepParameter p) {
    switch (p) {
    case SweepParameter::CurvatureRadius: return "CR";
    case SweepParameter::StepHeight: return "H";
    case SweepParameter::BendAngle: return "theta";
    }
    return "?";
}

SweepParameter parse_sweep_parameter(const std::string& name) {
    if (name == "CR") return SweepParameter::CurvatureRadius;
    if (name == "H") return SweepParameter::StepHeight;
    if (name == "theta") return SweepParameter::BendAngle;
    throw ValidationError("unknown sweep parameter '" + name + "' (expected H, CR or theta)");
}

double deviation_metric(const IVCurve& bent, const IVCurve& flat, double floor) {
    if (bent.currents.size() != flat.currents.size() || bent.biases != flat.biases)
        throw ValidationError("deviation metric needs curves on the same biases");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < flat.currents.size(); ++i) {
        num = std::max(num, std::abs(bent.currents[i] - flat.currents[i]));
        den = std::max(den, std::abs(flat.currents[i]));
    }
    return num / std::max(den, floor);
}

SweepReport sweep(const RibbonSpec& spec, const HoppingModel& model, SweepParameter parameter,
                  std::span<const double> values, const StepParameters& fixed, std::span<const double> biases,
                  const TransportOptions& opts, const IVCurve* flat_reference) {
    SweepReport rep;
    rep.parameter = parameter;
    rep.fixed = fixed;
    rep.spec = spec;
    rep.model = model;
    rep.values.assign(values.begin(), values.end());

    if (flat_reference) {
        if (!std::equal(flat_reference->biases.begin(), flat_reference->biases.end(), biases.begin(), biases.end()))
            throw ValidationError("flat reference curve was computed on different biases");
        rep.flat = *flat_reference;
    } else {
        rep.flat = iv_curve(build_flat_ribbon(spec), model, biases, opts);
    }

    for (double v : values) {
        StepParameters p = fixed;
        switch (parameter) {
        case SweepParameter::StepHeight: p.step_height = v; break;
        case SweepParameter::CurvatureRadius: p.curvature_radius = v; break;
        case SweepParameter::BendAngle: p.bend_angle_deg = v; break;
        }
        const BendProfile profile =
            resolve_profile(p.step_height, p.curvature_radius, p.bend_angle_deg, spec.channel_length(), spec.a_cc);
        rep.effective_angles.push_back(profile.effective_angle_deg);
        rep.curves.push_back(iv_curve(build_device(spec, profile), model, biases, opts));
        rep.deviations.push_back(deviation_metric(rep.curves.back(), rep.flat));
    }
    for (double v : biases) rep.field_v_per_nm.push_back(v / spec.channel_length());
    return rep;
}

double reference_span(SweepParameter p) {
    switch (p) {
    case SweepParameter::StepHeight: return 2.3 - 0.78;
    case SweepParameter::CurvatureRadius: return 3.1 - 0.40;
    case SweepParameter::BendAngle: return 90.0 - 30.0;
    }
    return 1.0;
}

namespace {

bool same_baseline(const SweepReport& a, const SweepReport& b) {
    const auto& sa = a.spec;
    const auto& sb = b.spec;
    const auto& ma = a.model;
    const auto& mb = b.model;
    return sa.n_a == sb.n_a && sa.n_cells_channel == sb.n_cells_channel && sa.n_cells_lead == sb.n_cells_lead &&
           sa.a_cc == sb.a_cc && ma.v_pp_pi == mb.v_pp_pi && ma.v_pp_sigma == mb.v_pp_sigma &&
           ma.decay_beta == mb.decay_beta && ma.cutoff == mb.cutoff && ma.edge_enhancement == mb.edge_enhancement &&
           a.flat.biases == b.flat.biases && a.flat.currents == b.flat.currents;
}

}  // namespace

SensitivityRanking sensitivity_rank(std::span<const SweepReport> reports) {
    if (reports.size() != 3) throw ValidationError("sensitivity ranking needs exactly three sweep reports");
    std::array<bool, 3> seen{};
    for (const auto& r : reports) {
        const auto idx = static_cast<std::size_t>(r.parameter);
        if (seen[idx]) throw ValidationError(std::string("duplicate sweep over ") + to_string(r.parameter));
        seen[idx] = true;
        if (!same_baseline(r, reports.front()))
            throw ValidationError("incomparable sweep reports: flat baselines differ");
    }

    struct Entry {
        SweepParameter p;
        double s;
    };
    std::vector<Entry> entries;
    for (const auto& r : reports) {
        double s = 0.0;
        if (r.values.size() > 1) {
            const auto [vmin, vmax] = std::minmax_element(r.values.begin(), r.values.end());
            const auto [dmin, dmax] = std::minmax_element(r.deviations.begin(), r.deviations.end());
            const double span = *vmax - *vmin;
            if (span > 0.0) s = (*dmax - *dmin) * reference_span(r.parameter) / span;
        }
        entries.push_back({r.parameter, s});
    }
    double scale = 0.0;
    for (const auto& e : entries) scale = std::max(scale, e.s);
    const double tie_tol = 1e-12 * scale;
    auto equal = [&](double a, double b) { return std::abs(a - b) <= tie_tol; };
    std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
        if (!equal(a.s, b.s)) return a.s > b.s;
        return std::string(to_string(a.p)) < std::string(to_string(b.p));
    });

    SensitivityRanking out;
    for (std::size_t i = 0; i < 3; ++i) {
        out.order[i] = entries[i].p;
        out.sensitivity[i] = entries[i].s;
    }
    out.tie = equal(entries[0].s, entries[1].s) || equal(entries[1].s, entries[2].s);
    out.all_tie = equal(entries[0].s, entries[2].s);
    return out;
}

}  // namespace stepgnr
