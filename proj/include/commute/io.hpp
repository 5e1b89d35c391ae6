#pragma once

#include <string>
#include <vector>

#include "commute/torus_grid.hpp"
#include "commute/voxel_set.hpp"

namespace commute {

// FGRID: "FGRD", u32 version = 1, u32 n, u32 resolution[n], f64 period[n],
// then prod(resolution) f64 values, row-major, axis 0 slowest.
// VOXSET: "VOXS", u32 version = 1, u32 n, f64 voxel_size, f64 origin[n],
// u64 count, then count * n i32 indices.
// All integers and floats are little-endian. Decoders throw FormatError on
// bad magic, version mismatch, truncation or trailing bytes.

std::string encode_fgrid(const GridField& field);
GridField decode_fgrid(const std::string& bytes);

std::string encode_voxset(const VoxelSet& voxels);
/// Indices must be stored sorted and unique so that encode(decode(b)) == b.
VoxelSet decode_voxset(const std::string& bytes);

GridField read_fgrid(const std::string& path);
void write_fgrid(const std::string& path, const GridField& field);
VoxelSet read_voxset(const std::string& path);
void write_voxset(const std::string& path, const VoxelSet& voxels);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

} // namespace commute
