#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "spikegrid/network.hpp"
#include "spikegrid/pipeline.hpp"
#include "spikegrid/train.hpp"

namespace spikegrid {

// One JSON document drives every command: dataset paths, network knobs,
// training hyperparameters and the split specification.
struct RunConfig {
    std::filesystem::path cube_path;
    std::filesystem::path labels_path;
    std::filesystem::path output_dir;
    int pca_components = 30;
    NetworkSpec network;  // patch_size/time_steps mirrored into train
    TrainConfig train;
    SplitSpec split;

    void validate() const;
};

// Parses and validates a config document; throws ConfigError with a
// field-level message on schema problems.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text);

std::string surrogate_kind_name(SurrogateKind kind);
SurrogateKind surrogate_kind_from_name(const std::string& name);

// Deterministic class palette; distinct colors for K <= 32, black reserved
// for unlabeled pixels.
struct ClassPalette {
    std::vector<std::array<unsigned char, 3>> colors;

    static ClassPalette default_for(int num_classes);
    std::array<unsigned char, 3> color(int class_label) const;  // 1-based; 0 -> black
};

}  // namespace spikegrid
