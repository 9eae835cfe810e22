#include "stepgnr/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace stepgnr {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "n_a", "n_cells_channel", "n_cells_lead", "a_cc",
        "step_height", "curvature_radius", "bend_angle",
        "v_pp_pi", "v_pp_sigma", "decay_beta", "cutoff", "edge_enhancement",
        "e_min", "e_max", "n_points", "eta", "ldos_eta",
        "biases", "ldos_atoms",
        "quad_tol", "quad_initial_intervals", "quad_max_depth", "quad_max_evaluations",
        "decimation_tol", "decimation_max_iter",
        "out_dir",
        "sweep_h_values", "sweep_h_curvature_radius", "sweep_h_bend_angle",
        "sweep_cr_values", "sweep_cr_step_height", "sweep_cr_bend_angle",
        "sweep_theta_values", "sweep_theta_step_height", "sweep_theta_curvature_radius",
    };
    return keys;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

class Entries {
public:
    explicit Entries(std::string source) : source_(std::move(source)) {}

    void add(const std::string& key, const std::string& value, int line) {
        if (!known_keys().count(key)) fail(key, line, "unknown key");
        if (values_.count(key)) fail(key, line, "repeated key");
        values_[key] = {value, line};
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    double number(const std::string& key) const {
        const auto& [text, line] = values_.at(key);
        return parse_double(key, text, line);
    }

    int integer(const std::string& key) const {
        const auto& [text, line] = values_.at(key);
        int v = 0;
        const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
        if (r.ec != std::errc() || r.ptr != text.data() + text.size()) fail(key, line, "expected an integer");
        return v;
    }

    std::vector<double> numbers(const std::string& key) const {
        const auto& [text, line] = values_.at(key);
        std::vector<double> out;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item), line));
        if (out.empty()) fail(key, line, "expected a comma separated list");
        return out;
    }

    std::vector<int> integers(const std::string& key) const {
        std::vector<int> out;
        for (double v : numbers(key)) {
            if (v != static_cast<int>(v)) fail(key, values_.at(key).second, "expected integers");
            out.push_back(static_cast<int>(v));
        }
        return out;
    }

    std::string text(const std::string& key) const { return values_.at(key).first; }

    [[noreturn]] void missing(const std::string& key) const {
        throw ConfigError(source_ + ": missing required key '" + key + "'");
    }

    [[noreturn]] void invalid(const std::string& key, const std::string& what) const {
        const int line = has(key) ? values_.at(key).second : 0;
        fail(key, line, what);
    }

private:
    [[noreturn]] void fail(const std::string& key, int line, const std::string& what) const {
        throw ConfigError(source_ + ":" + std::to_string(line) + ": key '" + key + "': " + what);
    }

    double parse_double(const std::string& key, const std::string& text, int line) const {
        double v = 0.0;
        const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
        if (r.ec != std::errc() || r.ptr != text.data() + text.size() || text.empty())
            fail(key, line, "expected a number, got '" + text + "'");
        return v;
    }

    std::string source_;
    std::map<std::string, std::pair<std::string, int>> values_;
};

}  // namespace

TransportOptions RunConfig::transport(bool linear_response, int threads) const {
    TransportOptions o;
    o.eta = grid.eta;
    o.decimation = decimation;
    o.quadrature = quadrature;
    o.linear_response = linear_response;
    o.threads = threads;
    return o;
}

RunConfig parse_config(std::string_view text, const std::string& source) {
    Entries e(source);
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(std::string_view(raw).substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        e.add(trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)), line_no);
    }

    RunConfig c;
    if (!e.has("n_a")) e.missing("n_a");
    if (!e.has("n_cells_channel")) e.missing("n_cells_channel");
    c.ribbon.n_a = e.integer("n_a");
    c.ribbon.n_cells_channel = e.integer("n_cells_channel");
    if (e.has("n_cells_lead")) c.ribbon.n_cells_lead = e.integer("n_cells_lead");
    if (e.has("a_cc")) c.ribbon.a_cc = e.number("a_cc");
    try {
        c.ribbon.validate();
    } catch (const ValidationError& err) {
        throw ConfigError(source + ": " + err.what());
    }

    const char* step_keys[] = {"step_height", "curvature_radius", "bend_angle"};
    const int present = static_cast<int>(std::count_if(std::begin(step_keys), std::end(step_keys),
                                                       [&](const char* k) { return e.has(k); }));
    if (present == 3) {
        c.step = StepParameters{e.number("step_height"), e.number("curvature_radius"), e.number("bend_angle")};
    } else if (present > 0) {
        for (const char* k : step_keys)
            if (!e.has(k)) e.missing(k);
    }

    if (e.has("v_pp_pi")) c.model.v_pp_pi = e.number("v_pp_pi");
    if (e.has("v_pp_sigma")) c.model.v_pp_sigma = e.number("v_pp_sigma");
    if (e.has("decay_beta")) c.model.decay_beta = e.number("decay_beta");
    if (e.has("cutoff")) c.model.cutoff = e.number("cutoff");
    if (e.has("edge_enhancement")) c.model.edge_enhancement = e.number("edge_enhancement");
    try {
        c.model.validate();
    } catch (const ValidationError& err) {
        throw ConfigError(source + ": " + err.what());
    }

    if (e.has("e_min")) c.grid.e_min = e.number("e_min");
    if (e.has("e_max")) c.grid.e_max = e.number("e_max");
    if (e.has("n_points")) c.grid.n_points = e.integer("n_points");
    if (e.has("eta")) c.grid.eta = e.number("eta");
    if (!(c.grid.e_min < c.grid.e_max)) e.invalid("e_max", "must exceed e_min");
    if (c.grid.n_points < 2) e.invalid("n_points", "must be >= 2");
    if (!(c.grid.eta > 0.0)) e.invalid("eta", "must be > 0");
    if (e.has("ldos_eta")) c.ldos_eta = e.number("ldos_eta");
    if (!(c.ldos_eta > 0.0)) e.invalid("ldos_eta", "must be > 0");

    if (e.has("biases")) {
        c.biases = e.numbers("biases");
        for (std::size_t i = 1; i < c.biases.size(); ++i)
            if (!(c.biases[i] > c.biases[i - 1])) e.invalid("biases", "must be strictly increasing");
    }
    if (e.has("ldos_atoms")) {
        c.ldos_atoms = e.integers("ldos_atoms");
        const int n_sites = c.ribbon.layer_count() * c.ribbon.atoms_per_cell();
        for (int a : c.ldos_atoms)
            if (a < 0 || a >= n_sites) e.invalid("ldos_atoms", "atom " + std::to_string(a) + " out of range");
    }

    if (e.has("quad_tol")) c.quadrature.rel_tol = e.number("quad_tol");
    if (e.has("quad_initial_intervals")) c.quadrature.initial_intervals = e.integer("quad_initial_intervals");
    if (e.has("quad_max_depth")) c.quadrature.max_depth = e.integer("quad_max_depth");
    if (e.has("quad_max_evaluations")) c.quadrature.max_evaluations = e.integer("quad_max_evaluations");
    if (!(c.quadrature.rel_tol > 0.0)) e.invalid("quad_tol", "must be > 0");
    if (c.quadrature.initial_intervals < 1) e.invalid("quad_initial_intervals", "must be >= 1");
    if (e.has("decimation_tol")) c.decimation.tol = e.number("decimation_tol");
    if (e.has("decimation_max_iter")) c.decimation.max_iter = e.integer("decimation_max_iter");
    if (!(c.decimation.tol > 0.0)) e.invalid("decimation_tol", "must be > 0");
    if (c.decimation.max_iter < 1) e.invalid("decimation_max_iter", "must be >= 1");

    if (e.has("out_dir")) c.out_dir = e.text("out_dir");

    struct SweepKeys {
        SweepParameter p;
        const char* prefix;
    };
    const SweepKeys sweeps[] = {{SweepParameter::StepHeight, "sweep_h_"},
                                {SweepParameter::CurvatureRadius, "sweep_cr_"},
                                {SweepParameter::BendAngle, "sweep_theta_"}};
    for (const auto& sk : sweeps) {
        const std::string prefix = sk.prefix;
        const std::string values_key = prefix + "values";
        auto fixed_value = [&](const char* name) {
            const std::string own = prefix + name;
            if (e.has(own)) return e.number(own);
            if (e.has(name)) return e.number(name);
            e.missing(own);
        };
        const bool any = e.has(values_key) || e.has(prefix + "step_height") ||
                         e.has(prefix + "curvature_radius") || e.has(prefix + "bend_angle");
        if (!any) continue;
        if (!e.has(values_key)) e.missing(values_key);
        SweepSpec s;
        s.parameter = sk.p;
        s.values = e.numbers(values_key);
        if (sk.p != SweepParameter::StepHeight) s.fixed.step_height = fixed_value("step_height");
        if (sk.p != SweepParameter::CurvatureRadius) s.fixed.curvature_radius = fixed_value("curvature_radius");
        if (sk.p != SweepParameter::BendAngle) s.fixed.bend_angle_deg = fixed_value("bend_angle");
        c.sweeps.push_back(s);
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

}  // namespace stepgnr
