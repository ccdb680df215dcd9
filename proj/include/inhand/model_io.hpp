#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "inhand/model.hpp"

namespace inhand {

// Loaders for the hand/object description files (JSON trees; schema in
// docs/formats.md). Both validate all model invariants and throw
// std::invalid_argument / std::runtime_error with the offending path.
HandModel load_hand(const std::string& path);
ObjectModel load_object(const std::string& path);

HandModel parse_hand(const nlohmann::json& j);
ObjectModel parse_object(const nlohmann::json& j);

// Shared JSON helpers (used by the scenario loader as well).
Pose parse_pose(const nlohmann::json& j);
Eigen::Vector3d parse_vec3(const nlohmann::json& j);
Primitive parse_primitive(const nlohmann::json& j);
nlohmann::json pose_to_json(const Pose& p);

nlohmann::json load_json_file(const std::string& path);

}  // namespace inhand
