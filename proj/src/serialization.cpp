#include "refill3d/serialization.hpp"

namespace refill3d {

void to_json(nlohmann::json& j, const Intrinsics& k) {
  j = nlohmann::json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
}

void from_json(const nlohmann::json& j, Intrinsics& k) {
  j.at("fx").get_to(k.fx);
  j.at("fy").get_to(k.fy);
  j.at("cx").get_to(k.cx);
  j.at("cy").get_to(k.cy);
}

void to_json(nlohmann::json& j, const Pose6D& p) {
  j = nlohmann::json{{"euler_xyz", p.euler_xyz},
                     {"translation", p.translation}};
}

void from_json(const nlohmann::json& j, Pose6D& p) {
  j.at("euler_xyz").get_to(p.euler_xyz);
  j.at("translation").get_to(p.translation);
}

void to_json(nlohmann::json& j, const ScaledEuclidean2D& t) {
  j = nlohmann::json{{"theta", t.theta}, {"tx", t.tx}, {"ty", t.ty}, {"s", t.s}};
}

void from_json(const nlohmann::json& j, ScaledEuclidean2D& t) {
  j.at("theta").get_to(t.theta);
  j.at("tx").get_to(t.tx);
  j.at("ty").get_to(t.ty);
  j.at("s").get_to(t.s);
}

void to_json(nlohmann::json& j, const Align3DConfig& c) {
  j = nlohmann::json{{"pyramid_levels", c.pyramid_levels},
                     {"max_iters_per_level", c.max_iters_per_level},
                     {"step_tolerance", c.step_tolerance},
                     {"charbonnier_eps", c.charbonnier_eps},
                     {"initial_pose", c.initial_pose}};
}

void from_json(const nlohmann::json& j, Align3DConfig& c) {
  j.at("pyramid_levels").get_to(c.pyramid_levels);
  j.at("max_iters_per_level").get_to(c.max_iters_per_level);
  j.at("step_tolerance").get_to(c.step_tolerance);
  j.at("charbonnier_eps").get_to(c.charbonnier_eps);
  j.at("initial_pose").get_to(c.initial_pose);
}

void to_json(nlohmann::json& j, const MetricsReport& m) {
  j = nlohmann::json{{"psnr", m.psnr},
                     {"ssim", m.ssim},
                     {"masked_psnr", m.masked_psnr},
                     {"valid_ratio", m.valid_ratio},
                     {"coverage", m.coverage}};
}

void from_json(const nlohmann::json& j, MetricsReport& m) {
  j.at("psnr").get_to(m.psnr);
  j.at("ssim").get_to(m.ssim);
  j.at("masked_psnr").get_to(m.masked_psnr);
  j.at("valid_ratio").get_to(m.valid_ratio);
  j.at("coverage").get_to(m.coverage);
}

void to_json(nlohmann::json& j, const Plane& p) {
  j = nlohmann::json{{"n", std::array<double, 3>{p.n.x, p.n.y, p.n.z}},
                     {"c", p.c},
                     {"texture", p.texture},
                     {"scale", p.scale}};
}

void from_json(const nlohmann::json& j, Plane& p) {
  std::array<double, 3> n{};
  j.at("n").get_to(n);
  p.n = {n[0], n[1], n[2]};
  j.at("c").get_to(p.c);
  j.at("texture").get_to(p.texture);
  j.at("scale").get_to(p.scale);
}

void to_json(nlohmann::json& j, const PlaneScene& s) {
  j = nlohmann::json{{"planes", s.planes}, {"background", s.background}};
}

void from_json(const nlohmann::json& j, PlaneScene& s) {
  j.at("planes").get_to(s.planes);
  j.at("background").get_to(s.background);
}

}  // namespace refill3d
