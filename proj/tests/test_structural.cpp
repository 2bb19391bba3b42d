#include <catch2/catch_amalgamated.hpp>

#include "jetmount/structural.hpp"

using namespace jetmount;

namespace {

Solid unit_cube() {
    Solid solid;
    solid.density = 1000.0;
    Primitive box;
    box.dims = Vec3(1.0, 1.0, 1.0);
    solid.primitives.push_back(box);
    return solid;
}

// Slender beam along x, clamped at x=0, end face loaded transversally.
Solid cantilever_solid(double length = 0.1, double width = 0.01, double height = 0.01) {
    Solid solid;
    solid.density = 2810.0;
    Primitive box;
    box.dims = Vec3(length, width, height);
    box.pose.pos = Vec3(0.5 * length, 0.0, 0.0);
    solid.primitives.push_back(box);
    solid.mount_face = FacePatch{Vec3::Zero(), -Vec3::UnitX(), width, height};
    solid.contact_face = FacePatch{Vec3(length, 0, 0), Vec3::UnitX(), width, height};
    return solid;
}

const GeometryParams kBaseline{15, 42, 80, 108};

}  // namespace

TEST_CASE("unit cube at half-edge resolution meshes to 48 tets") {
    const FemMesh mesh = generate_mesh(unit_cube(), 0.5);
    CHECK(mesh.nodes.size() == 27);
    CHECK(mesh.elements.size() == 48);
    CHECK_FALSE(mesh.fixed_nodes.empty());
    CHECK_FALSE(mesh.loaded_faces.empty());
}

TEST_CASE("halving the target edge multiplies the element count by about 8") {
    const auto coarse = generate_mesh(unit_cube(), 0.25);
    const auto fine = generate_mesh(unit_cube(), 0.125);
    const double ratio = static_cast<double>(fine.elements.size()) / static_cast<double>(coarse.elements.size());
    CHECK_THAT(ratio, Catch::Matchers::WithinRel(8.0, 0.05));
}

TEST_CASE("baseline bracket meshes have positive element volumes") {
    for (Part part : {Part::JetpackBracket, Part::ForearmSupport}) {
        const Solid solid = build_bracket(kBaseline, part);
        const FemMesh mesh = generate_mesh(solid, 0.004);
        for (const auto& tet : mesh.elements) {
            REQUIRE(tet_signed_volume(mesh.nodes[static_cast<size_t>(tet[0])], mesh.nodes[static_cast<size_t>(tet[1])],
                                      mesh.nodes[static_cast<size_t>(tet[2])],
                                      mesh.nodes[static_cast<size_t>(tet[3])]) > 0.0);
        }
        CHECK_FALSE(mesh.fixed_nodes.empty());
        CHECK_FALSE(mesh.loaded_faces.empty());
    }
}

TEST_CASE("meshing rejects a too-coarse target edge") {
    CHECK_THROWS_AS(generate_mesh(unit_cube(), 0.75), std::invalid_argument);
    Solid far_mount = unit_cube();
    far_mount.mount_face = FacePatch{Vec3(0, 0, 1e9), -Vec3::UnitZ(), 1.0, 1.0};
    CHECK_THROWS(generate_mesh(far_mount, 0.25));
}

TEST_CASE("zero load produces zero stress and an unbounded safety factor") {
    const Material material;
    const FemMesh mesh = generate_mesh(cantilever_solid(), 0.0025);
    const StressResult r = solve_static(mesh, material, 0.0, Vec3::UnitZ());
    for (const auto& d : r.displacement) CHECK(d.norm() == 0.0);
    CHECK(r.sigma_max == 0.0);
    CHECK(std::isinf(r.safety_factor));
}

TEST_CASE("cantilever bending stress matches beam theory") {
    const double length = 0.1, width = 0.01, height = 0.01, load = 100.0;
    Material material;
    const FemMesh mesh = generate_mesh(cantilever_solid(length, width, height), 0.00125);
    const StressResult r = solve_static(mesh, material, load, Vec3::UnitZ());
    const double beam_theory = 6.0 * load * length / (width * height * height);
    INFO("fem sigma_max = " << r.sigma_max << " beam theory = " << beam_theory
                            << " cg iterations = " << r.cg_iterations);
    CHECK_THAT(r.sigma_max, Catch::Matchers::WithinRel(beam_theory, 0.10));
}

TEST_CASE("stress scales linearly with load") {
    const FemMesh mesh = generate_mesh(cantilever_solid(), 0.0025);
    const Material material;
    const StressResult base = solve_static(mesh, material, 100.0, Vec3::UnitZ());
    for (double alpha : {0.5, 2.0, 10.0}) {
        const StressResult scaled = solve_static(mesh, material, alpha * 100.0, Vec3::UnitZ());
        CHECK_THAT(scaled.sigma_max, Catch::Matchers::WithinRel(alpha * base.sigma_max, 1e-10));
        for (size_t n = 0; n < base.displacement.size(); ++n) {
            const double want = alpha * base.displacement[n].norm();
            if (want > 0.0) {
                CHECK_THAT(scaled.displacement[n].norm(), Catch::Matchers::WithinRel(want, 1e-10));
            }
        }
    }
}

TEST_CASE("deformation work is positive under load") {
    const FemMesh mesh = generate_mesh(cantilever_solid(), 0.0025);
    const StressResult r = solve_static(mesh, Material{}, 100.0, Vec3::UnitZ());
    // equilibrium work f.d reconstructed from the same traction rule
    double total_area = 0.0;
    for (const auto& tri : mesh.loaded_faces) {
        total_area += 0.5 * (mesh.nodes[static_cast<size_t>(tri[1])] - mesh.nodes[static_cast<size_t>(tri[0])])
                                .cross(mesh.nodes[static_cast<size_t>(tri[2])] - mesh.nodes[static_cast<size_t>(tri[0])])
                                .norm();
    }
    double work = 0.0;
    for (const auto& tri : mesh.loaded_faces) {
        const double area = 0.5 * (mesh.nodes[static_cast<size_t>(tri[1])] - mesh.nodes[static_cast<size_t>(tri[0])])
                                      .cross(mesh.nodes[static_cast<size_t>(tri[2])] - mesh.nodes[static_cast<size_t>(tri[0])])
                                      .norm();
        for (int c : tri) {
            work += (100.0 * area / total_area / 3.0) * Vec3::UnitZ().dot(r.displacement[static_cast<size_t>(c)]);
        }
    }
    CHECK(work > 0.0);
}

TEST_CASE("safety factor arithmetic follows the yield ratio") {
    Material ergal;
    ergal.yield_strength = 462e6;
    CHECK_THAT(safety_factor(46.2e6, ergal), Catch::Matchers::WithinRel(10.0, 1e-12));
    CHECK_THAT(safety_factor(462e6, ergal), Catch::Matchers::WithinRel(1.0, 1e-12));
    CHECK_THAT(safety_factor(23.1e6, ergal), Catch::Matchers::WithinRel(20.0, 1e-12));
    CHECK(std::isinf(safety_factor(0.0, ergal)));
    CHECK_THROWS_AS(safety_factor(-1.0, ergal), std::invalid_argument);
}

TEST_CASE("smaller contact patches lower the safety factor") {
    const Material material;
    FemMesh mesh = generate_mesh(cantilever_solid(), 0.0025);
    const StressResult full = solve_static(mesh, material, 100.0, Vec3::UnitZ());

    // keep only the loaded faces in the upper half of the end face
    FemMesh clipped = mesh;
    clipped.loaded_faces.clear();
    for (const auto& tri : mesh.loaded_faces) {
        const Vec3 centroid = (mesh.nodes[static_cast<size_t>(tri[0])] + mesh.nodes[static_cast<size_t>(tri[1])] +
                               mesh.nodes[static_cast<size_t>(tri[2])]) / 3.0;
        if (centroid.z() > 0.0) clipped.loaded_faces.push_back(tri);
    }
    REQUIRE_FALSE(clipped.loaded_faces.empty());
    REQUIRE(clipped.loaded_faces.size() < mesh.loaded_faces.size());
    const StressResult half = solve_static(clipped, material, 100.0, Vec3::UnitZ());
    CHECK(half.safety_factor < full.safety_factor);
}

TEST_CASE("baseline design passes the structural gate") {
    StructuralConfig config;
    const GateResult gate = structural_gate(kBaseline, config);
    INFO("sf_jetpack = " << gate.sf_jetpack << " sf_forearm = " << gate.sf_forearm
                         << " cause = " << gate.failure_cause);
    CHECK(gate.feasible);
    CHECK(gate.sf >= 10.0);
}

TEST_CASE("pathologically thin members fail the gate") {
    StructuralConfig config;
    config.templates.column_side = 0.006;
    config.templates.strut_t = 0.006;
    config.templates.strut_w = 0.012;
    config.resolution = 0.002;
    const GateResult gate = structural_gate(kBaseline, config);
    INFO("sf_jetpack = " << gate.sf_jetpack << " sf_forearm = " << gate.sf_forearm);
    CHECK_FALSE(gate.feasible);
}

TEST_CASE("sigma_max is stable between the two finest configured resolutions") {
    // the shipped resolution ladder is {0.004, 0.0022, 0.002}
    const Solid solid = build_bracket(kBaseline, Part::JetpackBracket);
    const Material material;
    const auto frame = jet_mount_frame(kBaseline, Part::JetpackBracket);
    const StressResult a =
        solve_static(generate_mesh(solid, 0.0022), material, 250.0, frame.axis);
    const StressResult b =
        solve_static(generate_mesh(solid, 0.002), material, 250.0, frame.axis);
    INFO("sigma(0.0022) = " << a.sigma_max << " sigma(0.002) = " << b.sigma_max);
    CHECK(std::abs(a.sigma_max - b.sigma_max) / b.sigma_max < 0.05);
}
