#include "commute/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "commute/errors.hpp"

namespace commute {

namespace {

constexpr std::uint32_t kVersion = 1;

class ByteWriter {
public:
  void raw(std::string_view s) { out_.append(s); }

  template <class T> void le(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t b = 0; b < sizeof(T); ++b)
      out_.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFu));
  }

  std::string take() { return std::move(out_); }

private:
  std::string out_;
};

class ByteReader {
public:
  ByteReader(const std::string& bytes, const char* what) : bytes_(bytes), what_(what) {}

  void expect_magic(std::string_view magic) {
    need(magic.size());
    if (std::string_view(bytes_).substr(pos_, magic.size()) != magic)
      throw FormatError(std::string(what_) + ": bad magic");
    pos_ += magic.size();
  }

  template <class T> T le() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    need(sizeof(T));
    U bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b)
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    pos_ += sizeof(T);
    return std::bit_cast<T>(bits);
  }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw FormatError(std::string(what_) + ": truncated");
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

  void expect_end() const {
    if (pos_ != bytes_.size())
      throw FormatError(std::string(what_) + ": trailing bytes");
  }

private:
  const std::string& bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

} // namespace

std::string encode_fgrid(const GridField& field) {
  const TorusDomain& d = field.domain();
  ByteWriter w;
  w.raw("FGRD");
  w.le<std::uint32_t>(kVersion);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(d.n));
  for (int r : d.resolution)
    w.le<std::uint32_t>(static_cast<std::uint32_t>(r));
  for (double p : d.period)
    w.le<double>(p);
  for (double v : field.values())
    w.le<double>(v);
  return w.take();
}

GridField decode_fgrid(const std::string& bytes) {
  ByteReader r(bytes, "FGRID");
  r.expect_magic("FGRD");
  if (r.le<std::uint32_t>() != kVersion)
    throw FormatError("FGRID: unsupported version");
  const std::uint32_t n = r.le<std::uint32_t>();
  if (n != 2 && n != 3)
    throw FormatError("FGRID: dimension must be 2 or 3");
  TorusDomain d;
  d.n = static_cast<int>(n);
  for (std::uint32_t a = 0; a < n; ++a)
    d.resolution.push_back(static_cast<int>(r.le<std::uint32_t>()));
  for (std::uint32_t a = 0; a < n; ++a)
    d.period.push_back(r.le<double>());
  try {
    d.validate();
  } catch (const UsageError& e) {
    throw FormatError(std::string("FGRID: ") + e.what());
  }
  const std::size_t count = d.node_count();
  if (r.remaining() / 8 < count)
    throw FormatError("FGRID: truncated");
  std::vector<double> values(count);
  for (double& v : values)
    v = r.le<double>();
  r.expect_end();
  try {
    return GridField(std::move(d), std::move(values));
  } catch (const UsageError& e) {
    throw FormatError(std::string("FGRID: ") + e.what());
  }
}

std::string encode_voxset(const VoxelSet& voxels) {
  ByteWriter w;
  w.raw("VOXS");
  w.le<std::uint32_t>(kVersion);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(voxels.dim()));
  w.le<double>(voxels.voxel_size());
  for (double o : voxels.origin())
    w.le<double>(o);
  w.le<std::uint64_t>(voxels.count());
  for (const auto& idx : voxels.indices()) {
    for (int a = 0; a < voxels.dim(); ++a)
      w.le<std::int32_t>(idx[a]);
  }
  return w.take();
}

VoxelSet decode_voxset(const std::string& bytes) {
  ByteReader r(bytes, "VOXSET");
  r.expect_magic("VOXS");
  if (r.le<std::uint32_t>() != kVersion)
    throw FormatError("VOXSET: unsupported version");
  const std::uint32_t n = r.le<std::uint32_t>();
  if (n != 2 && n != 3)
    throw FormatError("VOXSET: dimension must be 2 or 3");
  const double size = r.le<double>();
  std::vector<double> origin(n);
  for (double& o : origin)
    o = r.le<double>();
  const std::uint64_t count = r.le<std::uint64_t>();
  if (r.remaining() / (4 * n) < count)
    throw FormatError("VOXSET: truncated");
  std::vector<VoxelSet::Index> indices(count, VoxelSet::Index{0, 0, 0});
  for (auto& idx : indices) {
    for (std::uint32_t a = 0; a < n; ++a)
      idx[a] = r.le<std::int32_t>();
  }
  r.expect_end();
  for (std::size_t k = 1; k < indices.size(); ++k) {
    if (!(indices[k - 1] < indices[k]))
      throw FormatError("VOXSET: indices must be sorted and unique");
  }
  try {
    return VoxelSet(static_cast<int>(n), size, std::move(origin), std::move(indices));
  } catch (const UsageError& e) {
    throw FormatError(std::string("VOXSET: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad())
    throw IoError("error while reading '" + path + "'");
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw IoError("error while writing '" + path + "'");
}

GridField read_fgrid(const std::string& path) { return decode_fgrid(read_file(path)); }
void write_fgrid(const std::string& path, const GridField& field) { write_file(path, encode_fgrid(field)); }
VoxelSet read_voxset(const std::string& path) { return decode_voxset(read_file(path)); }
void write_voxset(const std::string& path, const VoxelSet& voxels) { write_file(path, encode_voxset(voxels)); }

} // namespace commute
