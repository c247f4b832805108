#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rfc/model.hpp"

namespace rfc {

using nlohmann::json;

namespace detail {

inline Vec3 parse_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError(std::string(what) + " must be a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline Mat3 parse_inertia(const json& j) {
  Mat3 inertia = Mat3::Zero();
  if (j.is_array() && j.size() == 3 && j[0].is_number()) {
    inertia.diagonal() = parse_vec3(j, "inertia");
  } else if (j.is_array() && j.size() == 3 && j[0].is_array()) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) inertia(r, c) = j[r][c].get<double>();
  } else {
    throw ParseError("inertia must be a diagonal [3] or full [3][3] array");
  }
  return inertia;
}

inline Vec3 parse_axis(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "x") return Vec3::UnitX();
    if (s == "y") return Vec3::UnitY();
    if (s == "z") return Vec3::UnitZ();
    throw ParseError("named axis must be one of x, y, z");
  }
  return parse_vec3(j, "axis");
}

inline Geometry parse_geometry(const json& j) {
  Geometry g;
  const std::string type = j.at("type").get<std::string>();
  if (type == "sphere") {
    g.type = GeomType::Sphere;
    g.radius = j.at("radius").get<double>();
  } else if (type == "capsule") {
    g.type = GeomType::Capsule;
    g.radius = j.at("radius").get<double>();
    g.half_length = j.at("half_length").get<double>();
    if (j.contains("axis")) g.axis = parse_axis(j["axis"]);
  } else if (type == "box") {
    g.type = GeomType::Box;
    g.half_extents = parse_vec3(j.at("half_extents"), "half_extents");
  } else {
    throw ParseError("unknown geometry type '" + type + "'");
  }
  if (j.contains("offset")) g.offset = parse_vec3(j["offset"], "offset");
  return g;
}

// Accepts either a per-DoF array or a scalar broadcast over all joint DoFs.
inline VecX parse_dof_vector(const json& j, int nj, const char* what) {
  VecX v(nj);
  if (j.is_number()) {
    v.setConstant(j.get<double>());
  } else if (j.is_array()) {
    if (static_cast<int>(j.size()) != nj)
      throw ParseError(std::string(what) + " must have one entry per " +
                       "non-root DoF (" + std::to_string(nj) + ")");
    for (int i = 0; i < nj; ++i) v[i] = j[i].get<double>();
  } else {
    throw ParseError(std::string(what) + " must be a number or array");
  }
  return v;
}

inline int resolve_body(const json& j, const HumanoidModel& model,
                        const char* what) {
  if (j.is_number_integer()) {
    const int idx = j.get<int>();
    if (idx < 0 || idx >= model.body_count())
      throw ParseError(std::string(what) + ": body index out of range");
    return idx;
  }
  const std::string name = j.get<std::string>();
  for (int b = 0; b < model.body_count(); ++b)
    if (model.bodies[b].name == name) return b;
  throw ParseError(std::string(what) + ": unknown body '" + name + "'");
}

}  // namespace detail

// Loads and validates a model document. kd defaults to 0.2 kp, armature to
// 0.01 per joint DoF (the root carries none), torque limits to 0.2 kp kept
// inside the [50, 200] window. Limits outside that window load fine but
// leave a warning in model.load_warnings.
inline HumanoidModel load_model_json(const json& doc) {
  HumanoidModel model;
  model.name = doc.value("name", "unnamed");
  if (!doc.contains("bodies") || !doc["bodies"].is_array() ||
      doc["bodies"].empty())
    throw ParseError("model document needs a non-empty 'bodies' array");

  // First pass: names, so parents can be given by name or index.
  std::vector<std::string> names;
  for (const json& jb : doc["bodies"])
    names.push_back(jb.value("name", "body" + std::to_string(names.size())));

  int body_index = 0;
  for (const json& jb : doc["bodies"]) {
    Body body;
    body.name = names[body_index];
    if (jb.contains("parent") && !jb["parent"].is_null()) {
      const json& jp = jb["parent"];
      if (jp.is_number_integer()) {
        body.parent = jp.get<int>();
      } else {
        const std::string pname = jp.get<std::string>();
        body.parent = -1;
        for (size_t i = 0; i < names.size(); ++i)
          if (names[i] == pname) body.parent = static_cast<int>(i);
        if (body.parent < 0)
          throw ParseError("unknown parent body '" + pname + "'");
      }
    }
    body.mass = jb.at("mass").get<double>();
    body.inertia = detail::parse_inertia(jb.at("inertia"));
    if (jb.contains("com_offset"))
      body.com_offset = detail::parse_vec3(jb["com_offset"], "com_offset");
    if (jb.contains("attach_offset"))
      body.attach_offset =
          detail::parse_vec3(jb["attach_offset"], "attach_offset");

    const json& joint = jb.at("joint");
    const std::string kind = joint.at("kind").get<std::string>();
    if (kind == "free") {
      body.joint = JointKind::Free;
    } else if (kind == "hinge") {
      body.joint = JointKind::Hinge;
      if (!joint.contains("axes"))
        throw ParseError("hinge joint on '" + body.name + "' needs axes");
      for (const json& ja : joint["axes"])
        body.axes.push_back(detail::parse_axis(ja));
    } else {
      throw ParseError("unknown joint kind '" + kind + "'");
    }

    if (jb.contains("geometry")) {
      body.geom = detail::parse_geometry(jb["geometry"]);
      body.has_geom = true;
    }
    model.bodies.push_back(std::move(body));
    ++body_index;
  }

  int nj = 0;
  for (size_t b = 1; b < model.bodies.size(); ++b)
    nj += static_cast<int>(model.bodies[b].axes.size());

  const json gains = doc.value("gains", json::object());
  if (!gains.contains("kp"))
    throw ParseError("model document needs gains.kp");
  model.kp = detail::parse_dof_vector(gains["kp"], nj, "gains.kp");
  if (gains.contains("kd")) {
    model.kd = detail::parse_dof_vector(gains["kd"], nj, "gains.kd");
    for (int i = 0; i < nj; ++i)
      if (std::abs(model.kd[i] - 0.2 * model.kp[i]) >
          1e-9 * std::max(1.0, model.kp[i]))
        throw ValidationError("gains must satisfy kd = 0.2 kp (DoF " +
                              std::to_string(i) + ")");
  } else {
    model.kd = 0.2 * model.kp;
  }

  if (doc.contains("torque_limits")) {
    model.torque_limits =
        detail::parse_dof_vector(doc["torque_limits"], nj, "torque_limits");
  } else {
    model.torque_limits =
        (0.2 * model.kp).cwiseMax(50.0).cwiseMin(200.0);
  }
  for (int i = 0; i < nj; ++i)
    if (model.torque_limits[i] < 50.0 || model.torque_limits[i] > 200.0) {
      model.load_warnings.push_back(
          "torque limit " + std::to_string(model.torque_limits[i]) +
          " on DoF " + std::to_string(i) + " is outside the [50, 200] window");
    }

  model.armature = doc.contains("armature")
                       ? detail::parse_dof_vector(doc["armature"], nj,
                                                  "armature")
                       : VecX::Constant(nj, 0.01);

  model.finalize();

  if (doc.contains("end_effectors")) {
    for (const json& je : doc["end_effectors"])
      model.end_effectors.push_back(
          detail::resolve_body(je, model, "end_effectors"));
  } else {
    // Default: leaf bodies.
    std::vector<bool> has_child(model.bodies.size(), false);
    for (size_t b = 1; b < model.bodies.size(); ++b)
      has_child[model.bodies[b].parent] = true;
    for (size_t b = 0; b < model.bodies.size(); ++b)
      if (!has_child[b]) model.end_effectors.push_back(static_cast<int>(b));
  }
  if (doc.contains("rfc_bodies")) {
    for (const json& jr : doc["rfc_bodies"])
      model.rfc_bodies.push_back(
          detail::resolve_body(jr, model, "rfc_bodies"));
  } else {
    model.rfc_bodies.push_back(0);
  }
  return model;
}

inline HumanoidModel load_model_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
  return load_model_json(doc);
}

inline HumanoidModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_model_string(ss.str());
}

inline json save_model_json(const HumanoidModel& model) {
  json doc;
  doc["name"] = model.name;
  json bodies = json::array();
  for (int b = 0; b < model.body_count(); ++b) {
    const Body& body = model.bodies[b];
    json jb;
    jb["name"] = body.name;
    jb["parent"] = body.parent;
    jb["mass"] = body.mass;
    json inertia = json::array();
    for (int r = 0; r < 3; ++r)
      inertia.push_back({body.inertia(r, 0), body.inertia(r, 1),
                         body.inertia(r, 2)});
    jb["inertia"] = inertia;
    jb["com_offset"] = {body.com_offset.x(), body.com_offset.y(),
                        body.com_offset.z()};
    jb["attach_offset"] = {body.attach_offset.x(), body.attach_offset.y(),
                           body.attach_offset.z()};
    if (body.joint == JointKind::Free) {
      jb["joint"] = {{"kind", "free"}};
    } else {
      json axes = json::array();
      for (const Vec3& a : body.axes) axes.push_back({a.x(), a.y(), a.z()});
      jb["joint"] = {{"kind", "hinge"}, {"axes", axes}};
    }
    if (body.has_geom) {
      json jg;
      const Geometry& g = body.geom;
      switch (g.type) {
        case GeomType::Sphere:
          jg["type"] = "sphere";
          jg["radius"] = g.radius;
          break;
        case GeomType::Capsule:
          jg["type"] = "capsule";
          jg["radius"] = g.radius;
          jg["half_length"] = g.half_length;
          jg["axis"] = {g.axis.x(), g.axis.y(), g.axis.z()};
          break;
        case GeomType::Box:
          jg["type"] = "box";
          jg["half_extents"] = {g.half_extents.x(), g.half_extents.y(),
                                g.half_extents.z()};
          break;
      }
      jg["offset"] = {g.offset.x(), g.offset.y(), g.offset.z()};
      jb["geometry"] = jg;
    }
    bodies.push_back(jb);
  }
  doc["bodies"] = bodies;
  auto to_array = [](const VecX& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
  };
  doc["gains"] = {{"kp", to_array(model.kp)}, {"kd", to_array(model.kd)}};
  doc["torque_limits"] = to_array(model.torque_limits);
  doc["armature"] = to_array(model.armature);
  doc["end_effectors"] = model.end_effectors;
  doc["rfc_bodies"] = model.rfc_bodies;
  return doc;
}

inline void save_model(const HumanoidModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file '" + path + "'");
  out << save_model_json(model).dump(2) << '\n';
}

// FNV-1a over the canonical serialization; ties clips to the model they
// were authored for.
inline std::uint64_t model_hash(const HumanoidModel& model) {
  const std::string dump = save_model_json(model).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace rfc
