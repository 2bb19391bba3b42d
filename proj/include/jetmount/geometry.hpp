#pragma once

// Parametric solid models of the two jet interfaces (jetpack bracket and
// forearm support). The four design integers live on a fixed grid:
//
//   angle    [deg] 1..79  step 1   seat-plate tilt about the lateral axis
//   distance [mm]  40..100 step 2  plate-to-mount standoff
//   offset   [mm]  80..120 step 2  mount-face lateral translation
//   length   [mm]  50..150 step 2  arm-segment extrusion
//
// Interfaces take millimetres/degrees; everything below the boundary is SI.

#include "jetmount/math.hpp"

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace jetmount {

struct GeometryParams {
    int angle_deg = 0;
    int distance_mm = 0;
    int offset_mm = 0;
    int length_mm = 0;

    bool operator==(const GeometryParams&) const = default;
    std::array<int, 4> as_array() const { return {angle_deg, distance_mm, offset_mm, length_mm}; }
};

struct ParamSpec {
    const char* name;
    int min, max, step;
};

inline constexpr std::array<ParamSpec, 4> kParamGrid{{
    {"angle", 1, 79, 1},
    {"distance", 40, 100, 2},
    {"offset", 80, 120, 2},
    {"length", 50, 150, 2},
}};

struct ValidationResult {
    std::vector<std::string> violations;
    bool valid() const { return violations.empty(); }
};

inline ValidationResult validate_params(const GeometryParams& p) {
    ValidationResult res;
    const auto values = p.as_array();
    for (int i = 0; i < 4; ++i) {
        const ParamSpec& spec = kParamGrid[static_cast<size_t>(i)];
        const int v = values[static_cast<size_t>(i)];
        if (v < spec.min) {
            res.violations.push_back(std::string(spec.name) + " below min " + std::to_string(spec.min));
        } else if (v > spec.max) {
            res.violations.push_back(std::string(spec.name) + " above max " + std::to_string(spec.max));
        } else if ((v - spec.min) % spec.step != 0) {
            res.violations.push_back(std::string(spec.name) + " off step-" + std::to_string(spec.step) + " grid");
        }
    }
    return res;
}

// Nearest grid point; always valid.
inline GeometryParams snap_to_grid(const std::array<double, 4>& raw) {
    std::array<int, 4> snapped{};
    for (int i = 0; i < 4; ++i) {
        const ParamSpec& spec = kParamGrid[static_cast<size_t>(i)];
        const double steps = (raw[static_cast<size_t>(i)] - spec.min) / spec.step;
        long k = std::lround(steps);
        const long kmax = (spec.max - spec.min) / spec.step;
        k = std::clamp(k, 0L, kmax);
        snapped[static_cast<size_t>(i)] = spec.min + static_cast<int>(k) * spec.step;
    }
    return GeometryParams{snapped[0], snapped[1], snapped[2], snapped[3]};
}

enum class Part { JetpackBracket, ForearmSupport };

inline const char* part_name(Part p) {
    return p == Part::JetpackBracket ? "jetpack_bracket" : "forearm_support";
}

// ---------------------------------------------------------------------------
// Solids

struct Primitive {
    enum class Kind { Box, Cylinder };
    Kind kind = Kind::Box;
    // Box: dims = (sx, sy, sz). Cylinder: dims = (radius, height, 0), axis z.
    Vec3 dims = Vec3::Zero();
    Pose pose;  // local -> part frame

    double volume() const {
        if (kind == Kind::Box) return dims.x() * dims.y() * dims.z();
        return kPi * dims.x() * dims.x() * dims.y();
    }
    bool degenerate() const {
        if (kind == Kind::Box) return dims.minCoeff() <= 0.0;
        return dims.x() <= 0.0 || dims.y() <= 0.0;
    }
};

// Rectangular face patch used to tag the mount (fixed) and jet-contact
// (loaded) surfaces for the FEM stage.
struct FacePatch {
    Vec3 point = Vec3::Zero();   // face centre, part frame
    Vec3 normal = Vec3::UnitZ(); // outward
    double width = 0.0;          // face extents, metres
    double depth = 0.0;
};

struct Solid {
    std::vector<Primitive> primitives;
    double density = 0.0;  // kg/m^3, uniform
    std::optional<FacePatch> mount_face;
    std::optional<FacePatch> contact_face;

    double volume() const {
        double v = 0.0;
        for (const auto& p : primitives) v += p.volume();
        return v;
    }
};

// True when p (part frame) lies inside the primitive, with boundaries
// dilated by pad on every side.
inline bool primitive_contains(const Primitive& prim, const Vec3& p_part, double pad = 0.0) {
    const Vec3 local = prim.pose.rot.transpose() * (p_part - prim.pose.pos);
    if (prim.kind == Primitive::Kind::Box) {
        return std::abs(local.x()) <= 0.5 * prim.dims.x() + pad &&
               std::abs(local.y()) <= 0.5 * prim.dims.y() + pad &&
               std::abs(local.z()) <= 0.5 * prim.dims.z() + pad;
    }
    const double r = std::hypot(local.x(), local.y());
    return r <= prim.dims.x() + pad && std::abs(local.z()) <= 0.5 * prim.dims.y() + pad;
}

inline bool solid_contains(const Solid& solid, const Vec3& p_part, double pad = 0.0) {
    for (const auto& prim : solid.primitives) {
        if (primitive_contains(prim, p_part, pad)) return true;
    }
    return false;
}

struct MassProperties {
    double mass = 0.0;
    Vec3 com = Vec3::Zero();
    Mat3 inertia = Mat3::Zero();  // about com, part-frame axes
};

// Closed-form composite mass/CoM/inertia with parallel-axis aggregation.
inline MassProperties mass_properties(const Solid& solid) {
    if (solid.primitives.empty()) throw std::invalid_argument("mass_properties: empty solid");
    if (solid.density <= 0.0) throw std::invalid_argument("mass_properties: density must be positive");

    double mass = 0.0;
    Vec3 first_moment = Vec3::Zero();
    Mat3 inertia_origin = Mat3::Zero();

    for (const auto& prim : solid.primitives) {
        if (prim.degenerate()) throw std::invalid_argument("mass_properties: degenerate primitive");
        const double m = solid.density * prim.volume();
        Mat3 local = Mat3::Zero();
        if (prim.kind == Primitive::Kind::Box) {
            const double sx = prim.dims.x(), sy = prim.dims.y(), sz = prim.dims.z();
            local.diagonal() << m * (sy * sy + sz * sz) / 12.0,
                                m * (sx * sx + sz * sz) / 12.0,
                                m * (sx * sx + sy * sy) / 12.0;
        } else {
            const double r = prim.dims.x(), h = prim.dims.y();
            const double irr = m * (3.0 * r * r + h * h) / 12.0;
            local.diagonal() << irr, irr, m * r * r / 2.0;
        }
        const Vec3 c = prim.pose.pos;
        const Mat3 rotated = prim.pose.rot * local * prim.pose.rot.transpose();
        inertia_origin += rotated + m * (c.squaredNorm() * Mat3::Identity() - c * c.transpose());
        mass += m;
        first_moment += m * c;
    }

    MassProperties out;
    out.mass = mass;
    out.com = first_moment / mass;
    out.inertia = inertia_origin -
                  mass * (out.com.squaredNorm() * Mat3::Identity() - out.com * out.com.transpose());
    out.inertia = 0.5 * (out.inertia + out.inertia.transpose());
    return out;
}

// ---------------------------------------------------------------------------
// Bracket construction

// Base dimensions of the procedural parts plus the role assignment of the
// three millimetre parameters. All lengths in metres.
struct BracketTemplates {
    double density = 2810.0;  // 7075-class aluminium

    // Jetpack bracket: mount plate -> standoff column -> tilted jet seat.
    double plate_x = 0.120, plate_y = 0.080, plate_t = 0.010;
    double column_side = 0.016;
    double seat_base = 0.064;  // untilted seat footprint (square)
    double seat_t = 0.008;

    // Forearm support: cuff -> arm strut -> lateral bridge -> jet saddle.
    double cuff_x = 0.050, cuff_y = 0.044, cuff_z = 0.044;
    double strut_w = 0.036, strut_t = 0.016;
    double saddle_side = 0.064, saddle_t = 0.008;

    // Which millimetre parameter drives which geometric slot. The angle is
    // always the seat tilt. Indices refer to (angle, distance, offset,
    // length); the Fig. 3 reading is distance->standoff, offset->lateral,
    // length->extrusion.
    int standoff_index = 1;
    int lateral_index = 2;
    int extrusion_index = 3;
};

namespace detail {
inline double param_m(const GeometryParams& p, int index) {
    return static_cast<double>(p.as_array()[static_cast<size_t>(index)]) * 1e-3;
}
}  // namespace detail

inline Solid build_bracket(const GeometryParams& params, Part part,
                           const BracketTemplates& tpl = {}) {
    const auto check = validate_params(params);
    if (!check.valid()) {
        throw std::invalid_argument("build_bracket: invalid parameters: " + check.violations.front());
    }

    Solid solid;
    solid.density = tpl.density;

    if (part == Part::JetpackBracket) {
        const double tilt = deg2rad(params.angle_deg);
        const double standoff = detail::param_m(params, tpl.standoff_index);

        Primitive plate;
        plate.dims = Vec3(tpl.plate_x, tpl.plate_y, tpl.plate_t);
        plate.pose.pos = Vec3(0, 0, 0.5 * tpl.plate_t);
        solid.primitives.push_back(plate);

        Primitive column;
        column.dims = Vec3(tpl.column_side, tpl.column_side, standoff);
        column.pose.pos = Vec3(0, 0, tpl.plate_t + 0.5 * standoff);
        solid.primitives.push_back(column);

        // The seat spans the tilted jet footprint, so its depth grows with
        // the tilt; it rests on the column top, touching at the plane.
        const double seat_depth = tpl.seat_base / std::cos(tilt);
        const double z_top = tpl.plate_t + standoff;
        const double lift = 0.5 * seat_depth * std::abs(std::sin(tilt)) +
                            0.5 * tpl.seat_t * std::cos(tilt);
        Primitive seat;
        seat.dims = Vec3(seat_depth, tpl.seat_base, tpl.seat_t);
        seat.pose.rot = rot_y(tilt);
        seat.pose.pos = Vec3(0, 0, z_top + lift);
        solid.primitives.push_back(seat);

        FacePatch mount;
        mount.point = Vec3::Zero();
        mount.normal = -Vec3::UnitZ();
        mount.width = tpl.plate_x;
        mount.depth = tpl.plate_y;
        solid.mount_face = mount;

        FacePatch contact;
        contact.normal = rot_y(tilt) * Vec3::UnitZ();
        contact.point = seat.pose.pos + contact.normal * (0.5 * tpl.seat_t);
        contact.width = seat_depth;
        contact.depth = tpl.seat_base;
        solid.contact_face = contact;
        return solid;
    }

    const double lateral = detail::param_m(params, tpl.lateral_index);
    const double extrusion = detail::param_m(params, tpl.extrusion_index);

    Primitive cuff;
    cuff.dims = Vec3(tpl.cuff_x, tpl.cuff_y, tpl.cuff_z);
    cuff.pose.pos = Vec3(0, 0, 0.5 * tpl.cuff_z);
    solid.primitives.push_back(cuff);

    const double band_top = tpl.cuff_z;
    const double band_mid = band_top - 0.5 * tpl.strut_t;
    const double strut_end = 0.5 * tpl.cuff_x + extrusion;

    Primitive strut;
    strut.dims = Vec3(extrusion, tpl.strut_w, tpl.strut_t);
    strut.pose.pos = Vec3(0.5 * tpl.cuff_x + 0.5 * extrusion, 0, band_mid);
    solid.primitives.push_back(strut);

    Primitive bridge;
    bridge.dims = Vec3(tpl.strut_w, lateral, tpl.strut_t);
    bridge.pose.pos = Vec3(strut_end - 0.5 * tpl.strut_w, 0.5 * tpl.strut_w + 0.5 * lateral, band_mid);
    solid.primitives.push_back(bridge);

    const double bridge_end_y = 0.5 * tpl.strut_w + lateral;
    Primitive saddle;
    saddle.dims = Vec3(tpl.saddle_side, tpl.saddle_side, tpl.saddle_t);
    saddle.pose.pos = Vec3(strut_end - 0.5 * tpl.strut_w,
                           bridge_end_y - 0.5 * tpl.saddle_side,
                           band_top + 0.5 * tpl.saddle_t);
    solid.primitives.push_back(saddle);

    FacePatch mount;
    mount.point = Vec3::Zero();
    mount.normal = -Vec3::UnitZ();
    mount.width = tpl.cuff_x;
    mount.depth = tpl.cuff_y;
    solid.mount_face = mount;

    FacePatch contact;
    contact.normal = Vec3::UnitZ();
    contact.point = saddle.pose.pos + Vec3(0, 0, 0.5 * tpl.saddle_t);
    contact.width = tpl.saddle_side;
    contact.depth = tpl.saddle_side;
    solid.contact_face = contact;
    return solid;
}

struct JetMountFrame {
    Vec3 position = Vec3::Zero();  // parent-link frame, metres
    Vec3 axis = Vec3::UnitZ();     // local thrust direction, unit
    double contact_area = 0.0;     // m^2
};

inline JetMountFrame jet_mount_frame(const GeometryParams& params, Part part,
                                     const BracketTemplates& tpl = {}) {
    const Solid solid = build_bracket(params, part, tpl);
    JetMountFrame frame;
    frame.position = solid.contact_face->point;
    frame.axis = solid.contact_face->normal.normalized();
    frame.contact_area = solid.contact_face->width * solid.contact_face->depth;
    return frame;
}

// ---------------------------------------------------------------------------
// Binary STL export (little-endian, metres)

namespace detail {

inline void stl_write_tri(std::ostream& os, const Vec3& a, const Vec3& b, const Vec3& c) {
    Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    if (len > 0.0) n /= len;
    const auto put = [&os](const Vec3& v) {
        for (int i = 0; i < 3; ++i) {
            const float f = static_cast<float>(v[i]);
            os.write(reinterpret_cast<const char*>(&f), 4);
        }
    };
    put(n);
    put(a);
    put(b);
    put(c);
    const std::uint16_t attr = 0;
    os.write(reinterpret_cast<const char*>(&attr), 2);
}

inline void stl_collect_box(const Primitive& prim, std::vector<std::array<Vec3, 3>>& tris) {
    const Vec3 h = 0.5 * prim.dims;
    Vec3 corners[8];
    for (int i = 0; i < 8; ++i) {
        const Vec3 local((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
        corners[i] = prim.pose.apply(local);
    }
    static const int faces[6][4] = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4},
                                    {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
    for (const auto& f : faces) {
        tris.push_back({corners[f[0]], corners[f[1]], corners[f[2]]});
        tris.push_back({corners[f[0]], corners[f[2]], corners[f[3]]});
    }
}

inline void stl_collect_cylinder(const Primitive& prim, std::vector<std::array<Vec3, 3>>& tris,
                                 int segments = 32) {
    const double r = prim.dims.x(), hh = 0.5 * prim.dims.y();
    std::vector<Vec3> top, bot;
    for (int i = 0; i < segments; ++i) {
        const double a = 2.0 * kPi * i / segments;
        top.push_back(prim.pose.apply(Vec3(r * std::cos(a), r * std::sin(a), hh)));
        bot.push_back(prim.pose.apply(Vec3(r * std::cos(a), r * std::sin(a), -hh)));
    }
    const Vec3 ct = prim.pose.apply(Vec3(0, 0, hh));
    const Vec3 cb = prim.pose.apply(Vec3(0, 0, -hh));
    for (int i = 0; i < segments; ++i) {
        const int j = (i + 1) % segments;
        tris.push_back({bot[i], bot[j], top[j]});
        tris.push_back({bot[i], top[j], top[i]});
        tris.push_back({ct, top[i], top[j]});
        tris.push_back({cb, bot[j], bot[i]});
    }
}

}  // namespace detail

inline void export_stl(const Solid& solid, const std::string& path) {
    std::vector<std::array<Vec3, 3>> tris;
    for (const auto& prim : solid.primitives) {
        if (prim.kind == Primitive::Kind::Box) {
            detail::stl_collect_box(prim, tris);
        } else {
            detail::stl_collect_cylinder(prim, tris);
        }
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("export_stl: cannot open " + path);
    char header[80] = {};
    std::snprintf(header, sizeof(header), "jetmount solid export");
    os.write(header, 80);
    const std::uint32_t count = static_cast<std::uint32_t>(tris.size());
    os.write(reinterpret_cast<const char*>(&count), 4);
    for (const auto& t : tris) detail::stl_write_tri(os, t[0], t[1], t[2]);
}

}  // namespace jetmount
