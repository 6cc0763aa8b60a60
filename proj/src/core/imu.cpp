#include "bodyio/imu.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "bodyio/error.hpp"

namespace bodyio {

std::string_view to_string(RepresentationKind kind) {
  switch (kind) {
    case RepresentationKind::Body: return "Body";
    case RepresentationKind::Global: return "Global";
    case RepresentationKind::BodyPlusAttitude: return "BodyPlusAttitude";
    case RepresentationKind::GlobalPlusAttitude: return "GlobalPlusAttitude";
    case RepresentationKind::BodyMinusGravity: return "BodyMinusGravity";
    case RepresentationKind::GlobalMinusGravity: return "GlobalMinusGravity";
  }
  return "?";
}

RepresentationKind representation_from_string(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c == '_' || c == '-' || c == ' ') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (auto kind : {RepresentationKind::Body, RepresentationKind::Global,
                    RepresentationKind::BodyPlusAttitude,
                    RepresentationKind::GlobalPlusAttitude,
                    RepresentationKind::BodyMinusGravity,
                    RepresentationKind::GlobalMinusGravity}) {
    std::string ref(to_string(kind));
    std::transform(ref.begin(), ref.end(), ref.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ref == key) return kind;
  }
  fail(ErrorKind::Config,
       "unknown representation '" + std::string(name) + "'");
}

bool has_attitude(RepresentationKind kind) {
  return kind == RepresentationKind::BodyPlusAttitude ||
         kind == RepresentationKind::GlobalPlusAttitude;
}

bool is_body_frame(RepresentationKind kind) {
  return kind == RepresentationKind::Body ||
         kind == RepresentationKind::BodyPlusAttitude ||
         kind == RepresentationKind::BodyMinusGravity;
}

Vec3 specific_force(const Vec3& a_world, const RotationSO3& r,
                    const GravityModel& g) {
  return r.matrix().transpose() * (a_world - g.g_world);
}

ImuWindow transform_representation(const ImuWindow& window,
                                   RepresentationKind kind,
                                   std::span<const RotationSO3> rotations,
                                   const GravityModel& g) {
  if (window.kind != RepresentationKind::Body) {
    fail(ErrorKind::Argument,
         "transform_representation expects a Body window, got " +
             std::string(to_string(window.kind)));
  }
  ImuWindow out;
  out.kind = kind;
  out.samples = window.samples;
  if (kind == RepresentationKind::Body) return out;

  if (rotations.empty()) {
    fail(ErrorKind::Argument, std::string(to_string(kind)) +
                                  " requires per-sample attitudes (missing)");
  }
  if (rotations.size() != window.samples.size()) {
    fail(ErrorKind::Argument,
         "rotation count " + std::to_string(rotations.size()) +
             " does not match window length " +
             std::to_string(window.samples.size()));
  }

  // Upward reaction constant, i.e. -g_world.
  const Vec3 up = -g.g_world;
  const bool global = !is_body_frame(kind);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const Mat3& r = rotations[i].matrix();
    ImuSample& s = out.samples[i];
    switch (kind) {
      case RepresentationKind::BodyMinusGravity:
        s.a = s.a - r.transpose() * up;
        break;
      case RepresentationKind::GlobalMinusGravity:
        s.a = r * s.a - up;
        break;
      default:
        if (global) s.a = r * s.a;
        break;
    }
    if (global) s.w = r * s.w;
  }
  if (has_attitude(kind)) {
    out.attitudes.reserve(rotations.size());
    for (const auto& r : rotations) out.attitudes.push_back(log_so3(r));
  }
  return out;
}

}  // namespace bodyio
