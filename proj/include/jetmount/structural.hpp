#pragma once

// Linear-elastic static FEM over a bracket solid. Meshing lays one uniform
// structured grid over the composite (cell in iff its centre is inside a
// primitive), splits each hex into 6 tetrahedra, and welds joints with a
// fixed-radius collar so touching primitives form one load path. The mass
// model intentionally omits the weld collars.

#include "jetmount/geometry.hpp"
#include "jetmount/math.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace jetmount {

struct Material {
    double youngs_modulus = 71.7e9;  // Pa
    double poisson_ratio = 0.33;
    double yield_strength = 462e6;  // Pa

    void validate() const {
        if (youngs_modulus <= 0.0) throw std::invalid_argument("material: E must be positive");
        if (poisson_ratio <= 0.0 || poisson_ratio >= 0.5) {
            throw std::invalid_argument("material: poisson ratio out of (0, 0.5)");
        }
        if (yield_strength <= 0.0) throw std::invalid_argument("material: yield strength must be positive");
    }
};

struct FemMesh {
    std::vector<Vec3> nodes;
    std::vector<std::array<int, 4>> elements;        // tet4, positive volume
    std::vector<int> fixed_nodes;                    // mounting face
    std::vector<std::array<int, 3>> loaded_faces;    // jet-contact triangles, outward order
};

inline double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).cross(c - a).dot(d - a) / 6.0;
}

namespace detail {

inline double smallest_primitive_dimension(const Solid& solid) {
    double smallest = std::numeric_limits<double>::max();
    for (const auto& p : solid.primitives) {
        if (p.kind == Primitive::Kind::Box) {
            smallest = std::min(smallest, p.dims.minCoeff());
        } else {
            smallest = std::min({smallest, 2.0 * p.dims.x(), p.dims.y()});
        }
    }
    return smallest;
}

inline void solid_aabb(const Solid& solid, Vec3& lo, Vec3& hi) {
    lo = Vec3::Constant(std::numeric_limits<double>::max());
    hi = Vec3::Constant(std::numeric_limits<double>::lowest());
    for (const auto& p : solid.primitives) {
        // support of the oriented primitive along each axis
        Vec3 half;
        if (p.kind == Primitive::Kind::Box) {
            half = 0.5 * (p.pose.rot.cwiseAbs() * p.dims);
        } else {
            const Vec3 axis = p.pose.rot.col(2);
            for (int i = 0; i < 3; ++i) {
                const double radial = p.dims.x() * std::sqrt(std::max(0.0, 1.0 - axis[i] * axis[i]));
                half[i] = radial + 0.5 * p.dims.y() * std::abs(axis[i]);
            }
        }
        lo = lo.cwiseMin(p.pose.pos - half);
        hi = hi.cwiseMax(p.pose.pos + half);
    }
}

}  // namespace detail

// Structured grid over the composite, 6 tets per included hex. Welds joints
// with a collar of weld_radius so tangent primitives stay connected.
inline FemMesh generate_mesh(const Solid& solid, double target_edge, double weld_radius = 0.006) {
    if (solid.primitives.empty()) throw std::invalid_argument("generate_mesh: empty solid");
    if (target_edge <= 0.0) throw std::invalid_argument("generate_mesh: target_edge must be positive");
    const double smallest = detail::smallest_primitive_dimension(solid);
    if (target_edge > 0.5 * smallest + 1e-12) {
        throw std::invalid_argument("generate_mesh: target_edge too coarse for smallest dimension " +
                                    std::to_string(smallest));
    }

    Vec3 lo, hi;
    detail::solid_aabb(solid, lo, hi);
    const Vec3 extent = hi - lo;

    std::array<int, 3> cells{};
    Vec3 pitch;
    for (int i = 0; i < 3; ++i) {
        cells[static_cast<size_t>(i)] = std::max(1, static_cast<int>(std::ceil(extent[i] / target_edge - 1e-9)));
        pitch[i] = extent[i] / cells[static_cast<size_t>(i)];
    }

    const auto cell_included = [&](int i, int j, int k) {
        const Vec3 c = lo + Vec3((i + 0.5) * pitch.x(), (j + 0.5) * pitch.y(), (k + 0.5) * pitch.z());
        if (solid_contains(solid, c)) return true;
        // weld collar: near at least two distinct primitives
        int near_count = 0;
        for (const auto& prim : solid.primitives) {
            if (primitive_contains(prim, c, weld_radius) && ++near_count >= 2) return true;
        }
        return false;
    };

    FemMesh mesh;
    const auto node_key = [&](int i, int j, int k) {
        return (static_cast<std::int64_t>(i) << 42) | (static_cast<std::int64_t>(j) << 21) |
               static_cast<std::int64_t>(k);
    };
    std::map<std::int64_t, int> node_index;
    const auto get_node = [&](int i, int j, int k) {
        const auto key = node_key(i, j, k);
        auto it = node_index.find(key);
        if (it != node_index.end()) return it->second;
        const int idx = static_cast<int>(mesh.nodes.size());
        mesh.nodes.push_back(lo + Vec3(i * pitch.x(), j * pitch.y(), k * pitch.z()));
        node_index.emplace(key, idx);
        return idx;
    };

    // Kuhn 6-tet split; identical corner ordering in every cell keeps shared
    // quad faces triangulated along the same diagonal.
    static const int kTets[6][4] = {{0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7},
                                    {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7}};
    for (int i = 0; i < cells[0]; ++i) {
        for (int j = 0; j < cells[1]; ++j) {
            for (int k = 0; k < cells[2]; ++k) {
                if (!cell_included(i, j, k)) continue;
                int corner[8];
                for (int c = 0; c < 8; ++c) {
                    corner[c] = get_node(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                }
                for (const auto& t : kTets) {
                    std::array<int, 4> tet{corner[t[0]], corner[t[1]], corner[t[2]], corner[t[3]]};
                    if (tet_signed_volume(mesh.nodes[static_cast<size_t>(tet[0])], mesh.nodes[static_cast<size_t>(tet[1])],
                                          mesh.nodes[static_cast<size_t>(tet[2])], mesh.nodes[static_cast<size_t>(tet[3])]) < 0.0) {
                        std::swap(tet[2], tet[3]);
                    }
                    mesh.elements.push_back(tet);
                }
            }
        }
    }
    if (mesh.elements.empty()) throw std::runtime_error("generate_mesh: no cells inside solid");

    FacePatch mount = solid.mount_face.value_or(FacePatch{lo, -Vec3::UnitZ(), extent.x(), extent.y()});
    FacePatch contact = solid.contact_face.value_or(FacePatch{hi, Vec3::UnitZ(), extent.x(), extent.y()});
    const double min_pitch = pitch.minCoeff();

    for (int n = 0; n < static_cast<int>(mesh.nodes.size()); ++n) {
        if (std::abs((mesh.nodes[static_cast<size_t>(n)] - mount.point).dot(mount.normal)) < 0.25 * min_pitch) {
            mesh.fixed_nodes.push_back(n);
        }
    }

    // Boundary faces: triangles owned by exactly one tet, outward-ordered.
    std::map<std::array<int, 3>, std::pair<int, std::array<int, 3>>> face_count;
    for (const auto& tet : mesh.elements) {
        // outward-ordered for a positive-volume tet
        static const int kFaces[4][3] = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
        for (const auto& f : kFaces) {
            std::array<int, 3> tri{tet[static_cast<size_t>(f[0])], tet[static_cast<size_t>(f[1])], tet[static_cast<size_t>(f[2])]};
            std::array<int, 3> key = tri;
            std::sort(key.begin(), key.end());
            auto [it, inserted] = face_count.emplace(key, std::make_pair(0, tri));
            it->second.first++;
        }
    }
    for (const auto& [key, entry] : face_count) {
        if (entry.first != 1) continue;
        const auto& tri = entry.second;
        const Vec3 centroid = (mesh.nodes[static_cast<size_t>(tri[0])] + mesh.nodes[static_cast<size_t>(tri[1])] +
                               mesh.nodes[static_cast<size_t>(tri[2])]) / 3.0;
        if (std::abs((centroid - contact.point).dot(contact.normal)) > 0.75 * min_pitch) continue;
        const Vec3 n = (mesh.nodes[static_cast<size_t>(tri[1])] - mesh.nodes[static_cast<size_t>(tri[0])])
                           .cross(mesh.nodes[static_cast<size_t>(tri[2])] - mesh.nodes[static_cast<size_t>(tri[0])]);
        if (n.dot(contact.normal) > 0.05 * n.norm()) {
            mesh.loaded_faces.push_back(tri);
        }
    }

    if (mesh.fixed_nodes.empty()) throw std::runtime_error("generate_mesh: empty fixed node set");
    if (mesh.loaded_faces.empty()) throw std::runtime_error("generate_mesh: empty loaded face set");
    return mesh;
}

struct StressResult {
    std::vector<Vec3> displacement;  // per node, metres
    std::vector<double> von_mises;   // per element, Pa
    double sigma_max = 0.0;
    double safety_factor = std::numeric_limits<double>::infinity();
    int cg_iterations = 0;
};

// SF = sigma_y / sigma_max; unbounded (infinity) at zero stress.
inline double safety_factor(double sigma_max, const Material& material) {
    if (sigma_max < 0.0) throw std::invalid_argument("safety_factor: negative stress");
    if (sigma_max == 0.0) return std::numeric_limits<double>::infinity();
    return material.yield_strength / sigma_max;
}

namespace detail {

// Constant-strain B matrix (6x12) and volume of a tet.
inline void tet_b_matrix(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d,
                         Eigen::Matrix<double, 6, 12>& bmat, double& volume) {
    volume = tet_signed_volume(a, b, c, d);
    Mat3 jac;
    jac.col(0) = b - a;
    jac.col(1) = c - a;
    jac.col(2) = d - a;
    const Mat3 inv = jac.inverse();
    // shape gradients: rows of inv give grads of local coords
    Eigen::Matrix<double, 4, 3> grad;
    grad.row(1) = inv.row(0);
    grad.row(2) = inv.row(1);
    grad.row(3) = inv.row(2);
    grad.row(0) = -(grad.row(1) + grad.row(2) + grad.row(3));
    bmat.setZero();
    for (int n = 0; n < 4; ++n) {
        const double gx = grad(n, 0), gy = grad(n, 1), gz = grad(n, 2);
        const int c0 = 3 * n;
        bmat(0, c0) = gx;
        bmat(1, c0 + 1) = gy;
        bmat(2, c0 + 2) = gz;
        bmat(3, c0) = gy;
        bmat(3, c0 + 1) = gx;
        bmat(4, c0 + 1) = gz;
        bmat(4, c0 + 2) = gy;
        bmat(5, c0) = gz;
        bmat(5, c0 + 2) = gx;
    }
}

inline Eigen::Matrix<double, 6, 6> elasticity_matrix(const Material& m) {
    const double e = m.youngs_modulus, nu = m.poisson_ratio;
    const double f = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
    Eigen::Matrix<double, 6, 6> d = Eigen::Matrix<double, 6, 6>::Zero();
    d(0, 0) = d(1, 1) = d(2, 2) = f * (1.0 - nu);
    d(0, 1) = d(0, 2) = d(1, 0) = d(1, 2) = d(2, 0) = d(2, 1) = f * nu;
    d(3, 3) = d(4, 4) = d(5, 5) = f * (1.0 - 2.0 * nu) / 2.0;
    return d;
}

}  // namespace detail

// Assembles tet4 stiffness, applies a uniform traction totalling total_load
// over the loaded faces, eliminates fixed DoFs, and solves with Jacobi-
// preconditioned CG to relative residual 1e-8 (cap 50*sqrt(DoF)).
inline StressResult solve_static(const FemMesh& mesh, const Material& material, double total_load,
                                 const Vec3& load_direction) {
    material.validate();
    if (total_load < 0.0) throw std::invalid_argument("solve_static: negative load");
    if (mesh.fixed_nodes.empty()) throw std::invalid_argument("solve_static: no fixed nodes");

    const int n_nodes = static_cast<int>(mesh.nodes.size());
    std::vector<int> dof_of_node(static_cast<size_t>(n_nodes), 0);
    for (int f : mesh.fixed_nodes) dof_of_node[static_cast<size_t>(f)] = -1;
    int n_free_nodes = 0;
    for (auto& d : dof_of_node) {
        if (d == 0) d = n_free_nodes++;
    }
    const int n_free = 3 * n_free_nodes;
    if (n_free == 0) throw std::runtime_error("solve_static: fully constrained mesh");

    const auto dmat = detail::elasticity_matrix(material);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.elements.size() * 78);
    Eigen::Matrix<double, 6, 12> bmat;
    for (const auto& tet : mesh.elements) {
        double vol = 0.0;
        detail::tet_b_matrix(mesh.nodes[static_cast<size_t>(tet[0])], mesh.nodes[static_cast<size_t>(tet[1])],
                             mesh.nodes[static_cast<size_t>(tet[2])], mesh.nodes[static_cast<size_t>(tet[3])], bmat, vol);
        if (vol <= 0.0) throw std::runtime_error("solve_static: non-positive element volume");
        const Eigen::Matrix<double, 12, 12> ke = vol * bmat.transpose() * dmat * bmat;
        for (int a = 0; a < 4; ++a) {
            const int da = dof_of_node[static_cast<size_t>(tet[static_cast<size_t>(a)])];
            if (da < 0) continue;
            for (int b = 0; b < 4; ++b) {
                const int db = dof_of_node[static_cast<size_t>(tet[static_cast<size_t>(b)])];
                if (db < 0) continue;
                for (int r = 0; r < 3; ++r) {
                    for (int c = 0; c < 3; ++c) {
                        triplets.emplace_back(3 * da + r, 3 * db + c, ke(3 * a + r, 3 * b + c));
                    }
                }
            }
        }
    }
    Eigen::SparseMatrix<double> stiffness(n_free, n_free);
    stiffness.setFromTriplets(triplets.begin(), triplets.end());

    // traction: per-face share proportional to area, lumped to corner nodes
    double total_area = 0.0;
    std::vector<double> face_area(mesh.loaded_faces.size(), 0.0);
    for (size_t f = 0; f < mesh.loaded_faces.size(); ++f) {
        const auto& tri = mesh.loaded_faces[f];
        const Vec3 n = (mesh.nodes[static_cast<size_t>(tri[1])] - mesh.nodes[static_cast<size_t>(tri[0])])
                           .cross(mesh.nodes[static_cast<size_t>(tri[2])] - mesh.nodes[static_cast<size_t>(tri[0])]);
        face_area[f] = 0.5 * n.norm();
        total_area += face_area[f];
    }
    if (total_area <= 0.0) throw std::runtime_error("solve_static: zero loaded area");
    const Vec3 dir = load_direction.normalized();
    VecX force = VecX::Zero(n_free);
    for (size_t f = 0; f < mesh.loaded_faces.size(); ++f) {
        const Vec3 nodal = dir * (total_load * face_area[f] / total_area / 3.0);
        for (int corner : mesh.loaded_faces[f]) {
            const int dn = dof_of_node[static_cast<size_t>(corner)];
            if (dn < 0) continue;
            force.segment<3>(3 * dn) += nodal;
        }
    }

    StressResult result;
    VecX solution = VecX::Zero(n_free);
    if (force.norm() > 0.0) {
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                 Eigen::DiagonalPreconditioner<double>> cg;
        cg.setTolerance(1e-8);
        cg.setMaxIterations(static_cast<Eigen::Index>(50.0 * std::sqrt(static_cast<double>(n_free))));
        cg.compute(stiffness);
        solution = cg.solve(force);
        result.cg_iterations = static_cast<int>(cg.iterations());
        if (cg.info() != Eigen::Success) {
            throw std::runtime_error("solve_static: CG did not converge within iteration cap");
        }
    }

    result.displacement.assign(static_cast<size_t>(n_nodes), Vec3::Zero());
    for (int n = 0; n < n_nodes; ++n) {
        const int dn = dof_of_node[static_cast<size_t>(n)];
        if (dn >= 0) result.displacement[static_cast<size_t>(n)] = solution.segment<3>(3 * dn);
    }

    result.von_mises.resize(mesh.elements.size());
    double sigma_max = 0.0;
    for (size_t e = 0; e < mesh.elements.size(); ++e) {
        const auto& tet = mesh.elements[e];
        double vol = 0.0;
        detail::tet_b_matrix(mesh.nodes[static_cast<size_t>(tet[0])], mesh.nodes[static_cast<size_t>(tet[1])],
                             mesh.nodes[static_cast<size_t>(tet[2])], mesh.nodes[static_cast<size_t>(tet[3])], bmat, vol);
        Eigen::Matrix<double, 12, 1> de;
        for (int n = 0; n < 4; ++n) de.segment<3>(3 * n) = result.displacement[static_cast<size_t>(tet[static_cast<size_t>(n)])];
        const Eigen::Matrix<double, 6, 1> sigma = dmat * (bmat * de);
        const double vm = std::sqrt(0.5 * ((sigma[0] - sigma[1]) * (sigma[0] - sigma[1]) +
                                           (sigma[1] - sigma[2]) * (sigma[1] - sigma[2]) +
                                           (sigma[2] - sigma[0]) * (sigma[2] - sigma[0])) +
                                    3.0 * (sigma[3] * sigma[3] + sigma[4] * sigma[4] + sigma[5] * sigma[5]));
        result.von_mises[e] = vm;
        sigma_max = std::max(sigma_max, vm);
    }
    result.sigma_max = sigma_max;
    result.safety_factor = safety_factor(sigma_max, material);
    return result;
}

// ---------------------------------------------------------------------------
// Safety-factor gate

struct StructuralConfig {
    Material material;
    BracketTemplates templates;
    double resolution = 0.004;       // mesh target edge, metres
    double load = 250.0;             // jet max thrust, N
    double weld_radius = 0.006;
    double sf_threshold = 10.0;
};

struct GateResult {
    double sf = 0.0;  // min over both parts
    bool feasible = false;
    double sf_jetpack = 0.0;
    double sf_forearm = 0.0;
    std::string failure_cause;  // set when meshing/solving failed
};

// Builds both interface parts, applies the jet load along the mount axis,
// and gates on min safety factor. Solver errors map to infeasible.
inline GateResult structural_gate(const GeometryParams& params, const StructuralConfig& config) {
    GateResult gate;
    try {
        double min_sf = std::numeric_limits<double>::infinity();
        for (Part part : {Part::JetpackBracket, Part::ForearmSupport}) {
            const Solid solid = build_bracket(params, part, config.templates);
            const FemMesh mesh = generate_mesh(solid, config.resolution, config.weld_radius);
            const JetMountFrame frame = jet_mount_frame(params, part, config.templates);
            const StressResult stress = solve_static(mesh, config.material, config.load, frame.axis);
            (part == Part::JetpackBracket ? gate.sf_jetpack : gate.sf_forearm) = stress.safety_factor;
            min_sf = std::min(min_sf, stress.safety_factor);
        }
        gate.sf = min_sf;
        gate.feasible = min_sf >= config.sf_threshold;
    } catch (const std::exception& err) {
        gate.sf = 0.0;
        gate.feasible = false;
        gate.failure_cause = err.what();
    }
    return gate;
}

}  // namespace jetmount
