#pragma once

#include <json.hpp>

#include "refill3d/align2d.hpp"
#include "refill3d/align3d.hpp"
#include "refill3d/geometry.hpp"
#include "refill3d/metrics.hpp"
#include "refill3d/synth.hpp"

namespace refill3d {

void to_json(nlohmann::json& j, const Intrinsics& k);
void from_json(const nlohmann::json& j, Intrinsics& k);

void to_json(nlohmann::json& j, const Pose6D& p);
void from_json(const nlohmann::json& j, Pose6D& p);

void to_json(nlohmann::json& j, const ScaledEuclidean2D& t);
void from_json(const nlohmann::json& j, ScaledEuclidean2D& t);

void to_json(nlohmann::json& j, const Align3DConfig& c);
void from_json(const nlohmann::json& j, Align3DConfig& c);

void to_json(nlohmann::json& j, const MetricsReport& m);
void from_json(const nlohmann::json& j, MetricsReport& m);

void to_json(nlohmann::json& j, const Plane& p);
void from_json(const nlohmann::json& j, Plane& p);

void to_json(nlohmann::json& j, const PlaneScene& s);
void from_json(const nlohmann::json& j, PlaneScene& s);

}  // namespace refill3d
