#include "helpers.hpp"

#include "stepgnr/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace stepgnr;

namespace {

std::set<std::pair<int, int>> all_pairs_within(const std::vector<AtomSite>& sites, double d) {
    std::set<std::pair<int, int>> out;
    for (std::size_t i = 0; i < sites.size(); ++i)
        for (std::size_t j = i + 1; j < sites.size(); ++j)
            if ((sites[i].position - sites[j].position).norm() <= d) out.insert({int(i), int(j)});
    return out;
}

std::set<std::pair<int, int>> as_pairs(const std::vector<Bond>& bonds) {
    std::set<std::pair<int, int>> out;
    for (const auto& b : bonds) out.insert({b.i, b.j});
    return out;
}

}  // namespace

TEST_CASE("ribbon spec bounds") {
    RibbonSpec s{40, 16, 1, 0.142};
    CHECK_NOTHROW(s.validate());
    CHECK(s.atoms_per_cell() == 80);
    CHECK(s.layer_count() == 18);
    CHECK(s.channel_length() == doctest::Approx(16 * 0.426));
    CHECK_THROWS_AS((RibbonSpec{1, 4, 1, 0.142}.validate()), ValidationError);
    CHECK_THROWS_AS((RibbonSpec{7, 0, 1, 0.142}.validate()), ValidationError);
    CHECK_THROWS_AS((RibbonSpec{7, 4, 0, 0.142}.validate()), ValidationError);
    CHECK_THROWS_AS((RibbonSpec{7, 4, 1, -0.1}.validate()), ValidationError);
}

TEST_CASE("family classification") {
    CHECK(classify_family(40).family == Family::ThreePPlusOne);
    CHECK(classify_family(40).max_gap);
    CHECK(classify_family(40).p == 13);
    CHECK(classify_family(39).family == Family::ThreeP);
    CHECK(classify_family(41).family == Family::ThreePPlusTwo);
    CHECK(classify_family(7).label() == "3p+1");
}

TEST_CASE("flat ribbon: coordination and bond lengths") {
    const RibbonSpec spec{7, 3, 1, 0.142};
    const auto g = build_flat_ribbon(spec);
    REQUIRE(g.sites.size() == 5u * 14u);
    std::vector<int> degree(g.sites.size());
    for (const auto& b : g.bonds) {
        CHECK(b.length == doctest::Approx(0.142).epsilon(1e-12));
        ++degree[b.i];
        ++degree[b.j];
    }
    for (std::size_t i = 0; i < g.sites.size(); ++i) {
        const auto& s = g.sites[i];
        const bool end_layer = s.layer == 0 || s.layer == spec.layer_count() - 1;
        if (!s.edge && !end_layer) CHECK(degree[i] == 3);
        CHECK(s.position.y() == 0.0);
    }
    // every cell lists its atoms the same way: translate by one cell
    for (int i = 0; i < g.layer_size(); ++i) {
        const Vec3 d = g.sites[g.layer_offset(1) + i].position - g.sites[i].position;
        CHECK(d.norm() == doctest::Approx(spec.cell_length()));
        CHECK(d.z() == doctest::Approx(spec.cell_length()));
    }
}

TEST_CASE("bond search matches brute force (oracle)") {
    const RibbonSpec spec{8, 6, 1, 0.142};
    const auto flat = build_flat_ribbon(spec);
    CHECK(as_pairs(flat.bonds) == all_pairs_within(flat.sites, 1.1 * spec.a_cc));
    const auto bent = build_device(spec, resolve_profile(0.5, 0.45, 70, spec.channel_length()));
    const auto found = find_bonds(bent.sites, bent.layer_size(), 1.1 * spec.a_cc);
    CHECK(as_pairs(found) == all_pairs_within(bent.sites, 1.1 * spec.a_cc));
}

TEST_CASE("profile resolution") {
    SUBCASE("feasible triple keeps theta and rises to H") {
        const auto p = resolve_profile(1.3, 1.6, 30, 6.816);
        CHECK_FALSE(p.clamped);
        CHECK(p.effective_angle_deg == doctest::Approx(30));
        CHECK(p.effective_height() == doctest::Approx(1.3).epsilon(1e-12));
        CHECK(p.warning.empty());
    }
    SUBCASE("sharp step triple is clamped") {
        const auto p = resolve_profile(0.78, 0.40, 90, 6.816);
        CHECK(p.clamped);
        CHECK(p.effective_angle_deg == doctest::Approx(std::acos(1 - 0.78 / 0.8) * 180 / std::numbers::pi));
        CHECK(p.effective_angle_deg == doctest::Approx(88.5675).epsilon(1e-5));
        CHECK(p.incline_length == 0.0);
        CHECK(p.effective_height() == doctest::Approx(0.78).epsilon(1e-12));
        CHECK(p.warning.find("theta_eff") != std::string::npos);
    }
    SUBCASE("H = 0 gives the flat limit") {
        const auto p = resolve_profile(0.0, 1.0, 45, 6.816);
        CHECK(p.is_flat());
    }
    SUBCASE("bad input") {
        CHECK_THROWS_AS(resolve_profile(-1, 1, 30, 6.8), ValidationError);
        CHECK_THROWS_AS(resolve_profile(1, 0, 30, 6.8), ValidationError);
        CHECK_THROWS_AS(resolve_profile(1, 1, 0, 6.8), ValidationError);
        CHECK_THROWS_AS(resolve_profile(1, 1, 95, 6.8), ValidationError);
        CHECK_THROWS_AS(resolve_profile(1, 0.05, 30, 6.8), ValidationError);
        CHECK_THROWS_WITH_AS(resolve_profile(2.3, 1.6, 30, 2.0), doctest::Contains("profile too long"),
                             ValidationError);
    }
}

TEST_CASE("profile curve is continuous with unit speed in the incline") {
    const auto p = resolve_profile(1.3, 1.0, 45, 6.816);
    const double total = p.sheet_step_length();
    const double h = 1e-7;
    for (int i = 1; i < 200; ++i) {
        const double u = total * i / 200.0;
        const auto a = p.at(u - h), b = p.at(u + h);
        CHECK(std::hypot(b.dz - a.dz, b.dy - a.dy) == doctest::Approx(2 * h * (u > p.sheet_arc_length() &&
                                                                              u < p.sheet_arc_length() + p.incline_length
                                                                          ? 1.0
                                                                          : p.chord_stretch))
                                                          .epsilon(1e-5));
    }
    CHECK(p.at(total + 1.0).dy == doctest::Approx(1.3));
}

TEST_CASE("normals are perpendicular to the curve (finite differences)") {
    const RibbonSpec spec{5, 12, 1, 0.142};
    const auto prof = resolve_profile(0.9, 0.6, 60, spec.channel_length());
    const auto g = build_device(spec, prof);
    const double h = 1e-6;
    for (double u = 0.01; u < prof.sheet_step_length(); u += 0.05) {
        const auto a = prof.at(u - h), b = prof.at(u + h), c = prof.at(u);
        const Vec3 tangent = Vec3(0, b.dy - a.dy, b.dz - a.dz).normalized();
        const Vec3 normal(0, std::cos(c.angle), -std::sin(c.angle));
        CHECK(std::abs(tangent.dot(normal)) < 1e-6);
    }
    for (const auto& s : g.sites) CHECK(s.normal.norm() == doctest::Approx(1.0));
}

TEST_CASE("deformation keeps bonds, leads and the flat limit") {
    const RibbonSpec spec{40, 16, 1, 0.142};
    const auto flat = build_flat_ribbon(spec);
    const auto bent = build_device(spec, resolve_profile(0.78, 0.40, 90, spec.channel_length()));
    REQUIRE(bent.bonds.size() == flat.bonds.size());
    CHECK(max_bond_strain(bent) < 5e-3);
    CHECK(as_pairs(find_bonds(bent.sites, bent.layer_size(), 1.1 * spec.a_cc)) == as_pairs(flat.bonds));

    const Vec3 shift = bent.sites.back().position - flat.sites.back().position;
    CHECK(shift.y() == doctest::Approx(0.78));
    for (std::size_t i = 0; i < flat.sites.size(); ++i) {
        if (flat.sites[i].region == Region::LeftLead) CHECK(bent.sites[i].position == flat.sites[i].position);
        if (flat.sites[i].region == Region::RightLead) {
            CHECK((bent.sites[i].position - flat.sites[i].position - shift).norm() < 1e-12);
            CHECK(bent.sites[i].normal == Vec3(0, 1, 0));
        }
    }

    const auto same = build_device(spec, resolve_profile(0.0, 1.0, 30, spec.channel_length()));
    for (std::size_t i = 0; i < flat.sites.size(); ++i) CHECK(same.sites[i].position == flat.sites[i].position);
}

TEST_CASE("deformation rejects mismatched input") {
    const RibbonSpec spec{7, 16, 1, 0.142};
    const auto prof = resolve_profile(1.0, 1.0, 30, spec.channel_length());
    const auto bent = build_device(spec, prof);
    CHECK_THROWS_AS(apply_step_deformation(bent, prof), ValidationError);
    const auto other = resolve_profile(1.0, 1.0, 30, 2 * spec.channel_length());
    CHECK_THROWS_AS(apply_step_deformation(build_flat_ribbon(spec), other), ValidationError);
}

TEST_CASE("random triples: isometry and flat-limit identity (property)") {
    std::mt19937_64 rng(20240611);
    const RibbonSpec spec{9, 16, 1, 0.142};
    const auto flat = build_flat_ribbon(spec);
    int clamped = 0;
    for (int n = 0; n < 25; ++n) {
        const auto t = testing::random_triple(rng, spec.channel_length());
        const auto prof = resolve_profile(t.h, t.cr, t.theta, spec.channel_length());
        clamped += prof.clamped;
        const auto g = build_device(spec, prof);
        CHECK(max_bond_strain(g) < 5e-3);
        CHECK(g.bonds.size() == flat.bonds.size());
        CHECK(prof.effective_height() == doctest::Approx(t.h).epsilon(1e-10));
    }
    CHECK(clamped > 0);
}

TEST_CASE("xyz round trip") {
    testing::TempDir dir("xyz");
    const RibbonSpec spec{7, 12, 1, 0.142};
    const auto g = build_device(spec, resolve_profile(0.78, 0.40, 90, spec.channel_length()));
    export_xyz(g, dir.path() / "g.xyz");
    const auto pos = read_xyz(dir.path() / "g.xyz");
    REQUIRE(pos.size() == g.sites.size());
    for (std::size_t i = 0; i < pos.size(); ++i) CHECK((pos[i] - g.sites[i].position).norm() < 1e-9);
    CHECK_THROWS_AS(read_xyz(dir.path() / "missing.xyz"), IoError);
    CHECK_THROWS_AS(export_xyz(g, dir.path() / "no" / "such" / "dir.xyz"), IoError);
}
