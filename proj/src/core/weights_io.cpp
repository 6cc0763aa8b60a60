#include "bodyio/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "bodyio/error.hpp"

namespace bodyio {

static_assert(std::endian::native == std::endian::little,
              "weight files are written in host order, which must be little-endian");

namespace {

constexpr char kMagic[8] = {'B', 'F', 'I', 'O', 'W', 'G', 'T', '\0'};

template <typename T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::vector<char>& buf, std::size_t& pos,
       const std::filesystem::path& path) {
  if (pos + sizeof(T) > buf.size()) {
    fail(ErrorKind::Data, "truncated weight file " + path.string());
  }
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

void write_weight_file(const std::filesystem::path& path, const WeightFile& f) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::Data, "cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof(kMagic));
  put(os, kWeightFormatVersion);
  put(os, static_cast<std::uint32_t>(f.variant));
  put(os, static_cast<std::uint32_t>(f.metadata.size()));
  os.write(f.metadata.data(), static_cast<std::streamsize>(f.metadata.size()));
  put(os, static_cast<std::uint64_t>(f.payload.size()));
  os.write(reinterpret_cast<const char*>(f.payload.data()),
           static_cast<std::streamsize>(f.payload.size() * sizeof(double)));
  if (!os) fail(ErrorKind::Data, "write failed for " + path.string());
}

WeightFile read_weight_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::Data, "cannot open weight file " + path.string());
  const std::vector<char> buf((std::istreambuf_iterator<char>(is)),
                              std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kMagic) ||
      std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
    fail(ErrorKind::Data, "bad magic in weight file " + path.string());
  }
  std::size_t pos = sizeof(kMagic);
  const auto version = take<std::uint32_t>(buf, pos, path);
  if (version != kWeightFormatVersion) {
    fail(ErrorKind::Data, "unsupported weight file version " +
                              std::to_string(version));
  }
  WeightFile f;
  const auto tag = take<std::uint32_t>(buf, pos, path);
  if (tag < 1 || tag > 3) {
    fail(ErrorKind::Data, "unknown weight variant tag " + std::to_string(tag));
  }
  f.variant = static_cast<WeightVariant>(tag);
  const auto meta_len = take<std::uint32_t>(buf, pos, path);
  if (pos + meta_len > buf.size()) {
    fail(ErrorKind::Data, "truncated weight file " + path.string());
  }
  f.metadata.assign(buf.data() + pos, meta_len);
  pos += meta_len;
  const auto count = take<std::uint64_t>(buf, pos, path);
  if (buf.size() - pos != count * sizeof(double)) {
    fail(ErrorKind::Data, "payload size mismatch in " + path.string());
  }
  f.payload.resize(count);
  std::memcpy(f.payload.data(), buf.data() + pos, count * sizeof(double));
  return f;
}

}  // namespace bodyio
