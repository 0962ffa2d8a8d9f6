#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spikegrid/eig.hpp"
#include "spikegrid/tensor.hpp"

namespace spikegrid {

// H x W x B reflectance cube, band axis fastest.
struct HsiCube {
    int height = 0;
    int width = 0;
    int bands = 0;
    Tensor values;  // [H,W,B]

    void validate() const;
};

// Ground truth raster; 0 marks unlabeled pixels, classes run 1..K.
struct LabelMap {
    int height = 0;
    int width = 0;
    int num_classes = 0;
    std::vector<std::uint16_t> labels;  // row-major [H*W]

    std::uint16_t at(int row, int col) const { return labels[static_cast<std::size_t>(row) * width + col]; }
    void validate() const;
};

struct PcaModel {
    Tensor mean;        // [B]
    Tensor components;  // [B, n_keep], orthonormal columns, descending variance
    Tensor eigenvalues; // [n_keep] variances along the kept components

    int kept() const { return components.dim(1); }
};

// Principal components of the band covariance over every pixel. The sign of
// each component is fixed so its largest-magnitude entry is positive.
PcaModel fit_pca(const HsiCube& cube, int n_keep);

// Projects the cube onto the model's components -> [H, W, n_keep].
Tensor pca_project(const HsiCube& cube, const PcaModel& model);

struct PixelCoord {
    int row = 0;
    int col = 0;
    bool operator==(const PixelCoord&) const = default;
};

struct SplitSpec {
    enum class Mode { PerClassCount, PerClassFraction };
    Mode mode = Mode::PerClassCount;
    int count = 200;
    double fraction = 0.8;
    std::uint64_t seed = 0;
};

struct Split {
    std::vector<PixelCoord> train;
    std::vector<PixelCoord> test;
};

// Per-class random draw: under PerClassCount exactly min(count, size-1)
// training pixels per class, under PerClassFraction round(f*size) pixels
// (capped at size-1 so every class keeps a test pixel). Deterministic in the
// spec's seed. Throws DataError on an empty class.
Split stratified_split(const LabelMap& labels, const SplitSpec& spec);

// s x s window of the reduced cube centered at (row, col) -> [C, s, s].
// Positions beyond the image border reflect about the border (no edge pixel
// duplication), so a dark artificial class cannot appear at image edges.
Tensor extract_patch(const Tensor& reduced, int row, int col, int s);

// Per-component affine normalization fitted on training pixels only.
struct Standardizer {
    std::vector<float> mean;
    std::vector<float> inv_std;

    static Standardizer fit(const Tensor& reduced, const std::vector<PixelCoord>& train_pixels);
    void apply_in_place(Tensor& reduced) const;
};

// Direct (constant-current) coding: the analog patch repeated at every step.
Tensor encode_direct(const Tensor& patch, int t_steps);

// Blocked synthetic scene: the image is tiled into class regions, each class
// carries a distinct random spectral signature plus white noise. Fully labeled.
std::pair<HsiCube, LabelMap> generate_synthetic(int num_classes, int height, int width, int bands,
                                                float class_separation, float noise_sigma, std::uint64_t seed);

}  // namespace spikegrid
