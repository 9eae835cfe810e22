#include "helpers.hpp"

#include "stepgnr/commands.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace stepgnr;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int line_count(const std::filesystem::path& p) {
    const std::string s = slurp(p);
    return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

std::filesystem::path write_config(const testing::TempDir& dir, const std::string& text) {
    const auto p = dir.path() / "run.conf";
    std::ofstream(p) << text;
    return p;
}

const char* kSmall = "n_a = 5\nn_cells_channel = 12\ne_min = -1\ne_max = 1\nn_points = 5\n";

}  // namespace

TEST_CASE("number formatting") {
    CHECK(format_number(0.0) == "0.000000000e0");
    CHECK(format_number(-0.0) == "0.000000000e0");
    CHECK(format_number(1.0) == "1.000000000e0");
    CHECK(format_number(-0.5) == "-5.000000000e-1");
    CHECK(format_number(1.25e-13) == "1.250000000e-13");
    CHECK(format_number(6.02e23) == "6.020000000e23");
    CHECK(transmission_file_name(0.3) == "T_vb300.csv");
    CHECK(transmission_file_name(-0.1) == "T_vb-100.csv");
    CHECK(transmission_file_name(0.0) == "T_vb0.csv");
}

TEST_CASE("config parsing") {
    SUBCASE("defaults and lists") {
        const auto c = parse_config("# comment\nn_a = 40\nn_cells_channel = 16  # trailing\nbiases = 0, 0.1,0.2\n");
        CHECK(c.ribbon.n_a == 40);
        CHECK_FALSE(c.step.has_value());
        CHECK(c.biases == std::vector<double>{0, 0.1, 0.2});
        CHECK(c.model.v_pp_pi == -2.7);
    }
    SUBCASE("step keys are all or none") {
        const auto c = parse_config("n_a=7\nn_cells_channel=16\nstep_height=1\ncurvature_radius=1\nbend_angle=30\n");
        REQUIRE(c.step.has_value());
        CHECK(c.step->bend_angle_deg == 30);
        CHECK_THROWS_WITH_AS(parse_config("n_a=7\nn_cells_channel=16\nstep_height=1\n"),
                             doctest::Contains("curvature_radius"), ConfigError);
    }
    SUBCASE("sweeps fall back to the step keys") {
        const auto c = parse_config(
            "n_a=7\nn_cells_channel=16\nstep_height=1\ncurvature_radius=1\nbend_angle=30\n"
            "sweep_cr_values = 0.4, 1\nsweep_cr_bend_angle = 45\n");
        REQUIRE(c.sweeps.size() == 1);
        CHECK(c.sweeps[0].fixed.step_height == 1);
        CHECK(c.sweeps[0].fixed.bend_angle_deg == 45);
        CHECK_THROWS_WITH_AS(parse_config("n_a=7\nn_cells_channel=16\nsweep_h_values=1,2\n"),
                             doctest::Contains("sweep_h_curvature_radius"), ConfigError);
    }
    SUBCASE("errors name the key") {
        CHECK_THROWS_WITH_AS(parse_config("n_cells_channel=4\n"), doctest::Contains("n_a"), ConfigError);
        CHECK_THROWS_WITH_AS(parse_config("n_a=5\nn_cells_channel=4\nwidth=3\n"), doctest::Contains("width"),
                             ConfigError);
        CHECK_THROWS_WITH_AS(parse_config("n_a=5\nn_a=6\nn_cells_channel=4\n"), doctest::Contains("repeated"),
                             ConfigError);
        CHECK_THROWS_WITH_AS(parse_config("n_a=5x\nn_cells_channel=4\n"), doctest::Contains("n_a"), ConfigError);
        CHECK_THROWS_WITH_AS(parse_config("n_a=5\nn_cells_channel=4\neta=abc\n"), doctest::Contains("eta"),
                             ConfigError);
        CHECK_THROWS_WITH_AS(parse_config("n_a=5\nn_cells_channel=4\nbiases=0.2,0.1\n"), doctest::Contains("biases"),
                             ConfigError);
        CHECK_THROWS_WITH_AS(parse_config("n_a=5\nn_cells_channel=4\nldos_atoms=1000\n"),
                             doctest::Contains("ldos_atoms"), ConfigError);
        CHECK_THROWS_AS(parse_config("n_a 5\n"), ConfigError);
        CHECK_THROWS_AS(load_config("/nonexistent/run.conf"), IoError);
    }
}

TEST_CASE("build command") {
    testing::TempDir dir("build");
    std::ostringstream diag;
    CommandOptions o;
    o.out_dir = dir.path() / "flat";
    CHECK(run_command("build", write_config(dir, kSmall), o, diag) == 0);
    const auto pos = read_xyz(o.out_dir / "geometry.xyz");
    for (const auto& p : pos) CHECK(p.y() == 0.0);
    CHECK(slurp(o.out_dir / "geometry.json").find("\"bonds\"") != std::string::npos);

    o.out_dir = dir.path() / "sharp";
    const auto cfg = write_config(dir, "n_a=40\nn_cells_channel=16\nstep_height=0.78\ncurvature_radius=0.40\nbend_angle=90\n");
    CHECK(run_command("build", cfg, o, diag) == 0);
    CHECK(diag.str().find("theta_eff") != std::string::npos);

    std::ostringstream err;
    CHECK(run_command("build", write_config(dir, "n_cells_channel=4\n"), o, err) == 2);
    CHECK(err.str().find("n_a") != std::string::npos);
    CHECK(run_command("build", dir.path() / "missing.conf", o, err) == 3);
    CHECK(run_command("launch", write_config(dir, kSmall), o, err) == 2);
}

TEST_CASE("transmission, ldos and iv files") {
    testing::TempDir dir("cmd");
    std::ostringstream diag;
    CommandOptions o;
    o.out_dir = dir.path();
    const auto cfg = write_config(dir, std::string(kSmall) +
                                           "step_height=0.5\ncurvature_radius=0.5\nbend_angle=45\n"
                                           "biases = 0, 0.2\nldos_atoms = 30, 31, 32\nn_points = 4\n"
                                           "e_max = 0.5\nquad_tol = 1e-3\n");
    // n_points given twice is an error
    CHECK(run_command("transmission", cfg, o, diag) == 2);

    const auto good = write_config(dir, std::string(kSmall) +
                                            "step_height=0.5\ncurvature_radius=0.5\nbend_angle=45\n"
                                            "biases = 0, 0.2\nquad_tol = 1e-3\n");
    REQUIRE(run_command("transmission", good, o, diag) == 0);
    CHECK(line_count(dir.path() / "T_vb0.csv") == 6);
    CHECK(line_count(dir.path() / "T_vb200.csv") == 6);
    CHECK(slurp(dir.path() / "T_vb0.csv").rfind("energy_ev,transmission\n-1.000000000e0,", 0) == 0);

    REQUIRE(run_command("ldos", good, o, diag) == 0);
    CHECK(slurp(dir.path() / "ldos_sampling.json").find("\"arc\"") != std::string::npos);

    REQUIRE(run_command("iv", good, o, diag) == 0);
    const std::string iv = slurp(dir.path() / "iv.csv");
    CHECK(iv.rfind("bias_v,current_a\n0.000000000e0,0.000000000e0\n2.000000000e-1,", 0) == 0);

    const auto atoms = write_config(dir, "n_a = 5\nn_cells_channel = 12\ne_min = -1\ne_max = 1\nn_points = 4\n"
                                         "ldos_atoms = 30, 31, 32\n");
    REQUIRE(run_command("ldos", atoms, o, diag) == 0);
    CHECK(line_count(dir.path() / "ldos.csv") == 13);
    CHECK(slurp(dir.path() / "ldos_sampling.json").find("\"arc\"") == std::string::npos);

    const auto zero = write_config(dir, "n_a = 5\nn_cells_channel = 12\nbiases = 0.0\n");
    REQUIRE(run_command("iv", zero, o, diag) == 0);
    CHECK(slurp(dir.path() / "iv.csv") == "bias_v,current_a\n0.000000000e0,0.000000000e0\n");
}

TEST_CASE("sweep command output") {
    testing::TempDir dir("sweep");
    std::ostringstream diag;
    CommandOptions o;
    o.out_dir = dir.path();
    const auto cfg = write_config(dir,
                                  "n_a = 5\nn_cells_channel = 12\nbiases = 0, 0.3\nquad_tol = 1e-3\n"
                                  "sweep_h_values = 0.5, 1.0\nsweep_h_curvature_radius = 0.8\nsweep_h_bend_angle = 30\n"
                                  "sweep_cr_values = 0.4, 0.8\nsweep_cr_step_height = 0.6\nsweep_cr_bend_angle = 30\n"
                                  "sweep_theta_values = 30, 60\nsweep_theta_step_height = 1.0\n"
                                  "sweep_theta_curvature_radius = 0.6\n");
    REQUIRE(run_command("sweep", cfg, o, diag) == 0);
    const std::string json = slurp(dir.path() / "sweep.json");
    CHECK(json.find("\"field_v_per_nm\"") != std::string::npos);
    CHECK(json.find("\"D\"") != std::string::npos);
    CHECK(json.find("\"order\"") != std::string::npos);

    CHECK(run_command("sweep", write_config(dir, kSmall), o, diag) == 2);
}

TEST_CASE("outputs are identical across runs and thread counts") {
    testing::TempDir dir("det");
    std::ostringstream diag;
    const auto cfg = write_config(dir, "n_a = 5\nn_cells_channel = 12\nn_points = 31\n"
                                       "step_height=0.5\ncurvature_radius=0.5\nbend_angle=45\n"
                                       "biases = 0, 0.3\nquad_tol = 1e-4\n");
    std::vector<std::filesystem::path> outs;
    for (int threads : {1, 4, 1}) {
        CommandOptions o;
        o.threads = threads;
        o.out_dir = dir.path() / ("t" + std::to_string(outs.size()));
        for (const char* cmd : {"build", "transmission", "ldos", "iv"}) REQUIRE(run_command(cmd, cfg, o, diag) == 0);
        outs.push_back(o.out_dir);
    }
    for (const char* f : {"geometry.xyz", "geometry.json", "T_vb0.csv", "T_vb300.csv", "ldos.csv", "iv.csv"}) {
        CAPTURE(f);
        CHECK(slurp(outs[0] / f) == slurp(outs[1] / f));
        CHECK(slurp(outs[0] / f) == slurp(outs[2] / f));
    }
}
