#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bodyio {

/// Variant tags stored in the weight-file header.
enum class WeightVariant : std::uint32_t {
  IdentityCorrector = 1,
  AffineCorrector = 2,
  MotionNet = 3,
};

/// Weight container, little-endian:
///
///   offset  size  field
///   0       8     magic "BFIOWGT\0"
///   8       4     u32 format version (1)
///   12      4     u32 variant tag (WeightVariant)
///   16      4     u32 metadata length M
///   20      M     metadata, UTF-8 JSON (shapes and config)
///   20+M    8     u64 payload count N
///   28+M    8N    N IEEE-754 float64 values, row-major per tensor
struct WeightFile {
  WeightVariant variant = WeightVariant::IdentityCorrector;
  std::string metadata;
  std::vector<double> payload;
};

inline constexpr std::uint32_t kWeightFormatVersion = 1;

void write_weight_file(const std::filesystem::path& path, const WeightFile& f);
/// Throws ErrorKind::Data on bad magic, version, truncation or trailing bytes.
WeightFile read_weight_file(const std::filesystem::path& path);

}  // namespace bodyio
