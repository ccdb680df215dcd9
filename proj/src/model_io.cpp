#include "inhand/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace inhand {

using nlohmann::json;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

Eigen::Vector3d parse_vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Pose parse_pose(const json& j) {
  Pose out;
  if (j.contains("p")) out.p = parse_vec3(j.at("p"));
  if (j.contains("rpy")) {
    const Eigen::Vector3d rpy = parse_vec3(j.at("rpy"));
    out.R = (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
             Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
             Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
                .toRotationMatrix();
  } else if (j.contains("quat")) {  // scalar-last [x, y, z, w]
    const auto& q = j.at("quat");
    if (!q.is_array() || q.size() != 4) throw std::invalid_argument("quat must have 4 entries");
    out.R = quat_to_rotation<double>(
        Vector4<double>(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                        q[3].get<double>()));
  }
  return out;
}

json pose_to_json(const Pose& p) {
  const Vector4<double> q = rotation_to_quat<double>(p.R);
  json out;
  out["p"] = {p.p.x(), p.p.y(), p.p.z()};
  out["quat"] = {q(0), q(1), q(2), q(3)};
  return out;
}

Primitive parse_primitive(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "sphere") {
    return Primitive::sphere(parse_vec3(j.at("center")), j.at("radius").get<double>());
  }
  if (type == "capsule") {
    return Primitive::capsule(parse_vec3(j.at("p0")), parse_vec3(j.at("p1")),
                              j.at("radius").get<double>());
  }
  if (type == "box") {
    Pose pose;
    if (j.contains("pose")) pose = parse_pose(j.at("pose"));
    return Primitive::box(pose, parse_vec3(j.at("halfextents")));
  }
  if (type == "halfspace") {
    return Primitive::half_space(parse_vec3(j.at("normal")),
                                 j.value("offset", 0.0));
  }
  throw std::invalid_argument("unknown primitive type: " + type);
}

namespace {

void require_schema(const json& j, const std::string& expected, const std::string& what) {
  const std::string schema = j.value("schema", "");
  if (schema != expected) {
    throw std::invalid_argument(what + ": expected schema '" + expected + "', got '" + schema +
                                "'");
  }
}

}  // namespace

HandModel parse_hand(const json& j) {
  require_schema(j, "inhand.hand.v1", "hand file");
  HandModel hand;
  hand.name = j.value("name", "hand");
  if (j.contains("base_pose")) hand.base_pose = parse_pose(j.at("base_pose"));
  if (j.contains("palm")) {
    for (const auto& p : j.at("palm")) hand.palm.push_back(parse_primitive(p));
  }
  for (const auto& fj : j.at("fingers")) {
    Finger f;
    f.name = fj.at("name").get<std::string>();
    for (const auto& jj : fj.at("joints")) {
      Joint joint;
      joint.name = jj.at("name").get<std::string>();
      if (jj.contains("origin")) joint.origin = parse_pose(jj.at("origin"));
      joint.axis = parse_vec3(jj.at("axis")).normalized();
      const auto& lim = jj.at("limits");
      joint.q_min = lim[0].get<double>();
      joint.q_max = lim[1].get<double>();
      f.joints.push_back(joint);
    }
    for (const auto& lj : fj.at("links")) {
      Link link;
      link.name = lj.at("name").get<std::string>();
      if (lj.contains("collision")) {
        for (const auto& p : lj.at("collision")) link.collision.push_back(parse_primitive(p));
      }
      if (lj.contains("contacts")) {
        for (const auto& cj : lj.at("contacts")) {
          LinkContactPoint c;
          c.id = cj.at("id").get<std::string>();
          c.point = parse_vec3(cj.at("point"));
          link.contacts.push_back(c);
        }
      }
      f.links.push_back(link);
    }
    hand.fingers.push_back(std::move(f));
  }
  hand.validate();
  return hand;
}

ObjectModel parse_object(const json& j) {
  require_schema(j, "inhand.object.v1", "object file");
  ObjectModel obj;
  obj.name = j.value("name", "object");
  obj.mass = j.at("mass").get<double>();
  if (j.contains("inertia_diag")) {
    obj.inertia = parse_vec3(j.at("inertia_diag")).asDiagonal();
  } else {
    const auto& rows = j.at("inertia");
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) obj.inertia(r, c) = rows[r][c].get<double>();
    }
  }
  for (const auto& p : j.at("primitives")) obj.primitives.push_back(parse_primitive(p));
  for (const auto& cj : j.at("contacts")) {
    ObjectContactPoint c;
    c.id = cj.at("id").get<std::string>();
    c.point = parse_vec3(cj.at("point"));
    c.normal = parse_vec3(cj.at("normal")).normalized();
    c.tangent = parse_vec3(cj.at("tangent")).normalized();
    obj.contacts.push_back(c);
  }
  obj.validate();
  return obj;
}

HandModel load_hand(const std::string& path) {
  try {
    return parse_hand(load_json_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

ObjectModel load_object(const std::string& path) {
  try {
    return parse_object(load_json_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace inhand
