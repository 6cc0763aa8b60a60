#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bodyio/lie.hpp"

namespace bodyio {

/// One IMU reading: body-frame angular rate and specific force.
struct ImuSample {
  double t = 0.0;  // seconds
  Vec3 w = Vec3::Zero();  // rad/s
  Vec3 a = Vec3::Zero();  // m/s^2
};

inline constexpr double kGravityMagnitude = 9.80665;

/// World gravity vector. Fixed for the whole toolkit: (0, 0, -9.80665).
struct GravityModel {
  Vec3 g_world{0.0, 0.0, -kGravityMagnitude};
};

/// Input feature representations compared in the frame ablation.
enum class RepresentationKind {
  Body,
  Global,
  BodyPlusAttitude,
  GlobalPlusAttitude,
  BodyMinusGravity,
  GlobalMinusGravity,
};

std::string_view to_string(RepresentationKind kind);
/// Accepts the enumerator names, case-insensitively, with or without
/// separators ("body_minus_gravity", "BodyMinusGravity").
RepresentationKind representation_from_string(std::string_view name);

bool has_attitude(RepresentationKind kind);
/// True for Body, BodyPlusAttitude and BodyMinusGravity.
bool is_body_frame(RepresentationKind kind);

inline constexpr std::size_t kDefaultWindowLength = 1000;

/// A run of samples in some representation, optionally with one so(3)
/// attitude per sample.
struct ImuWindow {
  std::vector<ImuSample> samples;
  std::vector<TangentSO3> attitudes;  // empty unless has_attitude(kind)
  RepresentationKind kind = RepresentationKind::Body;

  std::size_t size() const { return samples.size(); }
};

/// Accelerometer reading for world acceleration `a_world` at attitude `r`:
/// R^T (a_world - g_world). A stationary level sensor reads +9.80665 on z.
Vec3 specific_force(const Vec3& a_world, const RotationSO3& r,
                    const GravityModel& g = {});

/// Maps a Body-representation window into `kind`. `rotations` are the
/// body-to-world attitudes per sample (ground truth for training, estimates
/// at inference). Body needs no rotations; every other kind does.
///
///   Global              a' = R a,        w' = R w
///   BodyMinusGravity    a' = a - R^T(-g)
///   GlobalMinusGravity  a' = R a - (-g), w' = R w
///   +Attitude           base kind, plus attitudes = log(R)
///
/// Throws ErrorKind::Argument on length mismatch or missing rotations, and
/// when the input window is not in Body representation.
ImuWindow transform_representation(const ImuWindow& window,
                                   RepresentationKind kind,
                                   std::span<const RotationSO3> rotations,
                                   const GravityModel& g = {});

}  // namespace bodyio
