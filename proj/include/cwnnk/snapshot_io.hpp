#pragma once

#include "cwnnk/snapshot.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace cwnnk {

// NNKA v1, little-endian:
//
//   "NNKA"            4 bytes magic
//   u16               version (= 1)
//   u64               step
//   u32 N, u32 C
//   C x u32           channel widths D_c
//   N x u16           labels
//   u16               num_classes
//   C x (N x D_c) f32 channel matrices, row-major
//   u32               CRC-32 of every preceding byte
inline constexpr std::uint16_t kNnkaVersion = 1;

std::vector<std::uint8_t> encode_snapshot(const FeatureSnapshot& snapshot);

// Throws FormatError (with byte offset) on structural problems and DataError
// on non-finite activations or invalid labels. Never returns a partial result.
FeatureSnapshot decode_snapshot(std::span<const std::uint8_t> bytes);

void write_snapshot(std::ostream& out, const FeatureSnapshot& snapshot);
void write_snapshot(const std::filesystem::path& path, const FeatureSnapshot& snapshot);
FeatureSnapshot read_snapshot(std::istream& in);
// A directory is read as the CSV layout, anything else as NNKA.
FeatureSnapshot read_snapshot(const std::filesystem::path& path);

// CSV fallback. The directory holds meta.csv ("step,<n>" and
// "num_classes,<n>" lines), labels.csv (one label per line) and
// channel_<c>.csv (N lines of D_c comma-separated values) for c = 0, 1, ...
void write_snapshot_csv(const std::filesystem::path& dir, const FeatureSnapshot& snapshot);
FeatureSnapshot read_snapshot_csv(const std::filesystem::path& dir);

}  // namespace cwnnk
