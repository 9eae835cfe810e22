#include "stepgnr/commands.hpp"

#include "stepgnr/parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace stepgnr {

using nlohmann::ordered_json;

std::string format_number(double v) {
    if (v == 0.0) v = 0.0;  // drops the sign of -0
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9e", v);
    std::string s(buf);
    const auto e = s.find('e');
    if (e == std::string::npos) return s;  // inf / nan
    std::string mant = s.substr(0, e);
    std::string exp = s.substr(e + 1);
    std::string sign;
    if (exp[0] == '+' || exp[0] == '-') {
        if (exp[0] == '-') sign = "-";
        exp.erase(0, 1);
    }
    const auto nz = exp.find_first_not_of('0');
    exp = nz == std::string::npos ? "0" : exp.substr(nz);
    if (exp == "0") sign.clear();
    return mant + "e" + sign + exp;
}

std::string transmission_file_name(double v_b) {
    const long long mv = std::llround(v_b * 1000.0);
    return "T_vb" + std::to_string(mv) + ".csv";
}

namespace {

ordered_json vec_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

ordered_json profile_json(const BendProfile& p) {
    ordered_json j;
    j["step_height"] = p.step_height;
    j["curvature_radius"] = p.curvature_radius;
    j["bend_angle_deg"] = p.bend_angle_deg;
    j["effective_angle_deg"] = p.effective_angle_deg;
    j["clamped"] = p.clamped;
    j["effective_height"] = p.effective_height();
    j["arc_length"] = p.arc_length;
    j["incline_length"] = p.incline_length;
    j["flat_margin"] = p.flat_margin;
    j["chord_stretch"] = p.chord_stretch;
    return j;
}

ordered_json fingerprint_json(const Fingerprint& f) {
    ordered_json j;
    j["step_height"] = f.step_height;
    j["curvature_radius"] = f.curvature_radius;
    j["effective_angle_deg"] = f.effective_angle_deg;
    j["n_a"] = f.n_a;
    return j;
}

std::filesystem::path output_dir(const RunConfig& cfg, const CommandOptions& opts) {
    std::filesystem::path dir = !opts.out_dir.empty() ? opts.out_dir
                                : !cfg.out_dir.empty() ? std::filesystem::path(cfg.out_dir)
                                                       : std::filesystem::path(".");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
    return dir;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
}

std::optional<BendProfile> config_profile(const RunConfig& cfg, std::ostream& diag) {
    if (!cfg.step) return std::nullopt;
    const BendProfile p = resolve_profile(cfg.step->step_height, cfg.step->curvature_radius,
                                          cfg.step->bend_angle_deg, cfg.ribbon.channel_length(), cfg.ribbon.a_cc);
    if (p.clamped) diag << "warning: " << p.warning << "\n";
    return p;
}

DeviceGeometry config_device(const RunConfig& cfg, std::ostream& diag) {
    return build_device(cfg.ribbon, config_profile(cfg, diag));
}

}  // namespace

std::string geometry_json(const DeviceGeometry& geom) {
    ordered_json j;
    const auto fam = classify_family(geom.spec.n_a);
    j["n_a"] = geom.spec.n_a;
    j["family"] = fam.label();
    j["n_cells_channel"] = geom.spec.n_cells_channel;
    j["n_cells_lead"] = geom.spec.n_cells_lead;
    j["a_cc"] = geom.spec.a_cc;
    j["units"] = "nm";
    j["profile"] = geom.profile ? profile_json(*geom.profile) : ordered_json(nullptr);
    j["max_bond_strain"] = max_bond_strain(geom);

    ordered_json sites = ordered_json::array();
    for (std::size_t i = 0; i < geom.sites.size(); ++i) {
        const AtomSite& s = geom.sites[i];
        ordered_json a;
        a["index"] = i;
        a["position"] = vec_json(s.position);
        a["normal"] = vec_json(s.normal);
        a["sublattice"] = to_string(s.sublattice);
        a["layer"] = s.layer;
        a["region"] = to_string(s.region);
        a["dimer_line"] = s.dimer_line;
        a["edge"] = s.edge;
        sites.push_back(std::move(a));
    }
    j["sites"] = std::move(sites);

    ordered_json bonds = ordered_json::array();
    for (const Bond& b : geom.bonds) bonds.push_back(ordered_json::array({b.i, b.j, b.length}));
    j["bonds"] = std::move(bonds);
    return j.dump(1) + "\n";
}

void cmd_build(const RunConfig& cfg, const CommandOptions& opts, std::ostream& diag) {
    const DeviceGeometry geom = config_device(cfg, diag);
    const auto dir = output_dir(cfg, opts);
    export_xyz(geom, dir / "geometry.xyz");
    write_file(dir / "geometry.json", geometry_json(geom));
}

void cmd_transmission(const RunConfig& cfg, const CommandOptions& opts, std::ostream& diag) {
    const DeviceGeometry geom = config_device(cfg, diag);
    const auto dir = output_dir(cfg, opts);
    const Fingerprint fp = fingerprint(geom);
    BlockHamiltonian frozen;
    if (opts.linear_response) frozen = assemble(geom, cfg.model, BiasRamp::for_device(cfg.ribbon, 0.0));
    for (double v : cfg.biases) {
        const BlockHamiltonian h =
            opts.linear_response ? frozen : assemble(geom, cfg.model, BiasRamp::for_device(cfg.ribbon, v));
        const auto spec = transmission_spectrum(h, cfg.grid, v, fp, opts.threads, cfg.decimation);
        std::string csv = "energy_ev,transmission\n";
        for (int i = 0; i < cfg.grid.n_points; ++i)
            csv += format_number(cfg.grid.at(i)) + "," + format_number(spec.values[i]) + "\n";
        write_file(dir / transmission_file_name(v), csv);
    }
}

void cmd_ldos(const RunConfig& cfg, const CommandOptions& opts, std::ostream& diag) {
    const DeviceGeometry geom = config_device(cfg, diag);
    const auto dir = output_dir(cfg, opts);
    const SamplingAtoms tags = sampling_atoms(geom);
    std::vector<int> atoms = cfg.ldos_atoms;
    if (atoms.empty()) {
        atoms.push_back(tags.far);
        if (tags.arc >= 0) atoms.push_back(tags.arc);
    }

    EnergyGrid grid = cfg.grid;
    grid.eta = cfg.ldos_eta;
    const BlockHamiltonian h = assemble(geom, cfg.model, BiasRamp::for_device(cfg.ribbon, 0.0));
    const LdosTable table = ldos(h, grid, opts.threads, cfg.decimation);

    std::string csv = "atom_index,energy_ev,ldos_per_ev\n";
    for (int a : atoms)
        for (int e = 0; e < grid.n_points; ++e)
            csv += std::to_string(a) + "," + format_number(grid.at(e)) + "," + format_number(table.values(a, e)) + "\n";
    write_file(dir / "ldos.csv", csv);

    ordered_json j;
    j["device"] = fingerprint_json(fingerprint(geom));
    j["eta"] = grid.eta;
    j["far"] = tags.far;
    if (tags.arc >= 0) j["arc"] = tags.arc;
    ordered_json listed = ordered_json::array();
    for (int a : atoms) {
        ordered_json e;
        e["atom_index"] = a;
        e["position"] = vec_json(geom.sites[a].position);
        e["region"] = to_string(geom.sites[a].region);
        ordered_json tag = ordered_json::array();
        if (a == tags.far) tag.push_back("far");
        if (a == tags.arc) tag.push_back("arc");
        e["tags"] = std::move(tag);
        listed.push_back(std::move(e));
    }
    j["atoms"] = std::move(listed);
    write_file(dir / "ldos_sampling.json", j.dump(1) + "\n");
}

void cmd_iv(const RunConfig& cfg, const CommandOptions& opts, std::ostream& diag) {
    const DeviceGeometry geom = config_device(cfg, diag);
    const auto dir = output_dir(cfg, opts);
    const IVCurve curve = iv_curve(geom, cfg.model, cfg.biases, cfg.transport(opts.linear_response, opts.threads));
    std::string csv = "bias_v,current_a\n";
    for (std::size_t i = 0; i < curve.biases.size(); ++i)
        csv += format_number(curve.biases[i]) + "," + format_number(curve.currents[i]) + "\n";
    write_file(dir / "iv.csv", csv);
}

void cmd_sweep(const RunConfig& cfg, const CommandOptions& opts, std::ostream& diag) {
    if (cfg.sweeps.empty()) throw ConfigError("sweep needs at least one sweep_*_values key");
    const auto dir = output_dir(cfg, opts);
    const TransportOptions topts = cfg.transport(opts.linear_response, opts.threads);
    const IVCurve flat = iv_curve(build_flat_ribbon(cfg.ribbon), cfg.model, cfg.biases, topts);

    std::vector<SweepReport> reports;
    for (const SweepSpec& s : cfg.sweeps) {
        // resolve once up front so clamp warnings reach the diagnostics stream
        for (double v : s.values) {
            StepParameters p = s.fixed;
            switch (s.parameter) {
            case SweepParameter::StepHeight: p.step_height = v; break;
            case SweepParameter::CurvatureRadius: p.curvature_radius = v; break;
            case SweepParameter::BendAngle: p.bend_angle_deg = v; break;
            }
            const auto prof = resolve_profile(p.step_height, p.curvature_radius, p.bend_angle_deg,
                                              cfg.ribbon.channel_length(), cfg.ribbon.a_cc);
            if (prof.clamped) diag << "warning: " << to_string(s.parameter) << " sweep: " << prof.warning << "\n";
        }
        reports.push_back(sweep(cfg.ribbon, cfg.model, s.parameter, s.values, s.fixed, cfg.biases, topts, &flat));
    }

    ordered_json j;
    j["n_a"] = cfg.ribbon.n_a;
    j["n_cells_channel"] = cfg.ribbon.n_cells_channel;
    j["channel_length_nm"] = cfg.ribbon.channel_length();
    j["linear_response"] = opts.linear_response;
    j["biases"] = cfg.biases;
    j["field_v_per_nm"] = reports.front().field_v_per_nm;
    j["flat_currents"] = flat.currents;

    ordered_json sweeps = ordered_json::array();
    for (const SweepReport& r : reports) {
        ordered_json s;
        s["parameter"] = to_string(r.parameter);
        ordered_json fixed;
        if (r.parameter != SweepParameter::StepHeight) fixed["step_height"] = r.fixed.step_height;
        if (r.parameter != SweepParameter::CurvatureRadius) fixed["curvature_radius"] = r.fixed.curvature_radius;
        if (r.parameter != SweepParameter::BendAngle) fixed["bend_angle"] = r.fixed.bend_angle_deg;
        s["fixed"] = std::move(fixed);
        ordered_json points = ordered_json::array();
        for (std::size_t i = 0; i < r.values.size(); ++i) {
            ordered_json p;
            p["value"] = r.values[i];
            p["effective_angle_deg"] = r.effective_angles[i];
            p["D"] = r.deviations[i];
            p["currents"] = r.curves[i].currents;
            points.push_back(std::move(p));
        }
        s["points"] = std::move(points);
        sweeps.push_back(std::move(s));
    }
    j["sweeps"] = std::move(sweeps);

    if (reports.size() == 3) {
        const SensitivityRanking rank = sensitivity_rank(reports);
        ordered_json order = ordered_json::array(), scores = ordered_json::array();
        for (int i = 0; i < 3; ++i) {
            order.push_back(to_string(rank.order[i]));
            scores.push_back(rank.sensitivity[i]);
        }
        j["sensitivity"] = {{"order", order}, {"scores", scores}, {"tie", rank.tie}, {"all_tie", rank.all_tie}};
    } else {
        j["sensitivity"] = nullptr;
    }
    write_file(dir / "sweep.json", j.dump(1) + "\n");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const std::invalid_argument*>(&e)) return 2;
    if (dynamic_cast<const IoError*>(&e)) return 3;
    if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const NumericalError*>(&e)) return 4;
    return 1;
}

int run_command(const std::string& command, const std::filesystem::path& config, const CommandOptions& opts,
                std::ostream& diag) {
    try {
        const RunConfig cfg = load_config(config);
        CommandOptions o = opts;
        if (o.threads < 0) throw ValidationError("--threads must be >= 0");
        o.threads = resolve_threads(o.threads);
        if (command == "build") cmd_build(cfg, o, diag);
        else if (command == "transmission") cmd_transmission(cfg, o, diag);
        else if (command == "ldos") cmd_ldos(cfg, o, diag);
        else if (command == "iv") cmd_iv(cfg, o, diag);
        else if (command == "sweep") cmd_sweep(cfg, o, diag);
        else throw ValidationError("unknown command '" + command + "'");
        return 0;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace stepgnr
