#pragma once

#include <filesystem>
#include <string>

#include "spikegrid/network.hpp"
#include "spikegrid/pipeline.hpp"

namespace spikegrid {

// ".hsic" cube container: magic "HSIC", u16 version, u32 H, u32 W, u32 B,
// then H*W*B little-endian float32, band-interleaved-by-pixel (band fastest).
void write_cube(const std::filesystem::path& path, const HsiCube& cube);
HsiCube read_cube(const std::filesystem::path& path);

// ".hsil" label container: magic "HSIL", u16 version, u32 H, u32 W, u16 K,
// then H*W little-endian u16 labels with 0 = unlabeled.
void write_labels(const std::filesystem::path& path, const LabelMap& labels);
LabelMap read_labels(const std::filesystem::path& path);

// Checkpoint: magic "SGCK", u16 version, u64 schema hash, named parameter
// tensors. The schema hash fingerprints the producing NetworkSpec.
void write_checkpoint(const std::filesystem::path& path, const ParamStore& params, std::uint64_t schema_hash);
struct Checkpoint {
    std::uint64_t schema_hash = 0;
    ParamStore params;
};
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Writes `content` to a temporary sibling file and renames it over `path`.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace spikegrid
