#include "spikegrid/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "spikegrid/rng.hpp"

namespace spikegrid {

void HsiCube::validate() const {
    if (height < 1 || width < 1 || bands < 1) throw DataError("HsiCube: empty dimensions");
    if (values.shape != std::vector<int>{height, width, bands}) throw DataError("HsiCube: tensor shape mismatch");
    if (!values.all_finite()) throw DataError("HsiCube: non-finite reflectance value");
}

void LabelMap::validate() const {
    if (height < 1 || width < 1) throw DataError("LabelMap: empty dimensions");
    if (labels.size() != static_cast<std::size_t>(height) * width) throw DataError("LabelMap: raster size mismatch");
    for (auto l : labels)
        if (l > num_classes) throw DataError("LabelMap: label " + std::to_string(l) + " exceeds class count");
}

PcaModel fit_pca(const HsiCube& cube, int n_keep) {
    cube.validate();
    if (n_keep < 1 || n_keep > cube.bands) throw DataError("fit_pca: n_keep must be in [1, bands]");
    const int b = cube.bands;
    const std::int64_t n_px = static_cast<std::int64_t>(cube.height) * cube.width;

    std::vector<double> mean(static_cast<std::size_t>(b), 0.0);
    for (std::int64_t p = 0; p < n_px; ++p) {
        const float* px = &cube.values.data[static_cast<std::size_t>(p) * b];
        for (int i = 0; i < b; ++i) mean[static_cast<std::size_t>(i)] += px[i];
    }
    for (auto& m : mean) m /= static_cast<double>(n_px);

    std::vector<double> cov(static_cast<std::size_t>(b) * b, 0.0);
    std::vector<double> centered(static_cast<std::size_t>(b));
    for (std::int64_t p = 0; p < n_px; ++p) {
        const float* px = &cube.values.data[static_cast<std::size_t>(p) * b];
        for (int i = 0; i < b; ++i) centered[static_cast<std::size_t>(i)] = px[i] - mean[static_cast<std::size_t>(i)];
        for (int i = 0; i < b; ++i) {
            const double ci = centered[static_cast<std::size_t>(i)];
            double* row = &cov[static_cast<std::size_t>(i) * b];
            for (int j = i; j < b; ++j) row[j] += ci * centered[static_cast<std::size_t>(j)];
        }
    }
    const double denom = n_px > 1 ? static_cast<double>(n_px - 1) : 1.0;
    Tensor cov_t = Tensor::zeros({b, b});
    for (int i = 0; i < b; ++i)
        for (int j = i; j < b; ++j) {
            const float v = static_cast<float>(cov[static_cast<std::size_t>(i) * b + j] / denom);
            cov_t.at({i, j}) = v;
            cov_t.at({j, i}) = v;
        }

    SymEigResult eig = sym_eig(cov_t);

    PcaModel model;
    model.mean = Tensor::zeros({b});
    for (int i = 0; i < b; ++i) model.mean[i] = static_cast<float>(mean[static_cast<std::size_t>(i)]);
    model.components = Tensor::zeros({b, n_keep});
    model.eigenvalues = Tensor::zeros({n_keep});
    for (int c = 0; c < n_keep; ++c) {
        model.eigenvalues[c] = eig.eigenvalues[c];
        // Deterministic sign: largest-magnitude entry positive.
        int arg = 0;
        float best = 0.0f;
        for (int i = 0; i < b; ++i) {
            const float v = std::abs(eig.eigenvectors.at({i, c}));
            if (v > best) {
                best = v;
                arg = i;
            }
        }
        const float sign = eig.eigenvectors.at({arg, c}) >= 0.0f ? 1.0f : -1.0f;
        for (int i = 0; i < b; ++i) model.components.at({i, c}) = sign * eig.eigenvectors.at({i, c});
    }
    return model;
}

Tensor pca_project(const HsiCube& cube, const PcaModel& model) {
    const int b = cube.bands, keep = model.kept();
    if (model.components.dim(0) != b) throw DataError("pca_project: model fitted on a different band count");
    Tensor out = Tensor::zeros({cube.height, cube.width, keep});
    const std::int64_t n_px = static_cast<std::int64_t>(cube.height) * cube.width;
    for (std::int64_t p = 0; p < n_px; ++p) {
        const float* px = &cube.values.data[static_cast<std::size_t>(p) * b];
        float* dst = &out.data[static_cast<std::size_t>(p) * keep];
        for (int c = 0; c < keep; ++c) {
            double s = 0.0;
            for (int i = 0; i < b; ++i)
                s += (static_cast<double>(px[i]) - static_cast<double>(model.mean[i])) *
                     static_cast<double>(model.components.at({i, c}));
            dst[c] = static_cast<float>(s);
        }
    }
    return out;
}

Split stratified_split(const LabelMap& labels, const SplitSpec& spec) {
    labels.validate();
    if (labels.num_classes < 1) throw DataError("stratified_split: no classes");
    if (spec.mode == SplitSpec::Mode::PerClassCount && spec.count < 1)
        throw DataError("stratified_split: count must be >= 1");
    if (spec.mode == SplitSpec::Mode::PerClassFraction && !(spec.fraction > 0.0 && spec.fraction < 1.0))
        throw DataError("stratified_split: fraction must be in (0,1)");

    std::vector<std::vector<PixelCoord>> per_class(static_cast<std::size_t>(labels.num_classes));
    for (int r = 0; r < labels.height; ++r)
        for (int c = 0; c < labels.width; ++c) {
            const int l = labels.at(r, c);
            if (l > 0) per_class[static_cast<std::size_t>(l - 1)].push_back({r, c});
        }

    Rng rng(spec.seed);
    Split split;
    for (int k = 0; k < labels.num_classes; ++k) {
        auto& pixels = per_class[static_cast<std::size_t>(k)];
        if (pixels.empty()) throw DataError("stratified_split: class " + std::to_string(k + 1) + " has no labeled pixels");
        Rng class_rng = rng.fork(static_cast<std::uint64_t>(k));
        class_rng.shuffle(pixels);
        const int size = static_cast<int>(pixels.size());
        int n_train = 0;
        if (spec.mode == SplitSpec::Mode::PerClassCount) {
            n_train = std::min(spec.count, size - 1);
        } else {
            n_train = static_cast<int>(std::lround(spec.fraction * size));
            n_train = std::min(n_train, size - 1);
        }
        n_train = std::max(n_train, size > 1 ? 1 : 0);
        for (int i = 0; i < size; ++i)
            (i < n_train ? split.train : split.test).push_back(pixels[static_cast<std::size_t>(i)]);
    }
    return split;
}

namespace {

// Reflect an index about the borders without duplicating edge pixels.
int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
}

}  // namespace

Tensor extract_patch(const Tensor& reduced, int row, int col, int s) {
    if (reduced.rank() != 3) throw ShapeError("extract_patch: reduced cube must be [H,W,C]");
    if (s < 1 || s % 2 == 0) throw DataError("extract_patch: patch size must be odd");
    const int h = reduced.dim(0), w = reduced.dim(1), c = reduced.dim(2);
    if (row < 0 || row >= h || col < 0 || col >= w) throw DataError("extract_patch: center outside image");
    const int half = s / 2;
    Tensor out = Tensor::zeros({c, s, s});
    for (int dy = -half; dy <= half; ++dy) {
        const int src_r = reflect_index(row + dy, h);
        for (int dx = -half; dx <= half; ++dx) {
            const int src_c = reflect_index(col + dx, w);
            const float* px = &reduced.data[(static_cast<std::size_t>(src_r) * w + src_c) * c];
            for (int ch = 0; ch < c; ++ch)
                out.data[(static_cast<std::size_t>(ch) * s + (dy + half)) * s + (dx + half)] = px[ch];
        }
    }
    return out;
}

Standardizer Standardizer::fit(const Tensor& reduced, const std::vector<PixelCoord>& train_pixels) {
    if (train_pixels.empty()) throw DataError("Standardizer: no training pixels");
    const int w = reduced.dim(1), c = reduced.dim(2);
    std::vector<double> mean(static_cast<std::size_t>(c), 0.0), var(static_cast<std::size_t>(c), 0.0);
    for (const auto& p : train_pixels) {
        const float* px = &reduced.data[(static_cast<std::size_t>(p.row) * w + p.col) * c];
        for (int i = 0; i < c; ++i) mean[static_cast<std::size_t>(i)] += px[i];
    }
    for (auto& m : mean) m /= static_cast<double>(train_pixels.size());
    for (const auto& p : train_pixels) {
        const float* px = &reduced.data[(static_cast<std::size_t>(p.row) * w + p.col) * c];
        for (int i = 0; i < c; ++i) {
            const double d = px[i] - mean[static_cast<std::size_t>(i)];
            var[static_cast<std::size_t>(i)] += d * d;
        }
    }
    Standardizer st;
    st.mean.resize(static_cast<std::size_t>(c));
    st.inv_std.resize(static_cast<std::size_t>(c));
    for (int i = 0; i < c; ++i) {
        const double v = var[static_cast<std::size_t>(i)] / static_cast<double>(train_pixels.size());
        const double sd = std::sqrt(std::max(v, 1e-12));
        st.mean[static_cast<std::size_t>(i)] = static_cast<float>(mean[static_cast<std::size_t>(i)]);
        st.inv_std[static_cast<std::size_t>(i)] = static_cast<float>(1.0 / sd);
    }
    return st;
}

void Standardizer::apply_in_place(Tensor& reduced) const {
    const int c = reduced.dim(2);
    if (static_cast<std::size_t>(c) != mean.size()) throw ShapeError("Standardizer: component count mismatch");
    const std::int64_t n_px = reduced.size() / c;
    for (std::int64_t p = 0; p < n_px; ++p) {
        float* px = &reduced.data[static_cast<std::size_t>(p) * c];
        for (int i = 0; i < c; ++i) px[i] = (px[i] - mean[static_cast<std::size_t>(i)]) * inv_std[static_cast<std::size_t>(i)];
    }
}

Tensor encode_direct(const Tensor& patch, int t_steps) {
    if (patch.rank() != 3) throw ShapeError("encode_direct: patch must be [C,s,s]");
    if (t_steps < 1) throw DataError("encode_direct: need at least one time step");
    Tensor out = Tensor::zeros({t_steps, patch.dim(0), patch.dim(1), patch.dim(2)});
    const std::size_t n = patch.data.size();
    for (int t = 0; t < t_steps; ++t)
        std::copy(patch.data.begin(), patch.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(t) * static_cast<std::ptrdiff_t>(n));
    return out;
}

std::pair<HsiCube, LabelMap> generate_synthetic(int num_classes, int height, int width, int bands,
                                                float class_separation, float noise_sigma, std::uint64_t seed) {
    if (num_classes < 2) throw DataError("generate_synthetic: need at least two classes");
    if (!(class_separation > 0.0f)) throw DataError("generate_synthetic: class_separation must be positive");
    if (noise_sigma < 0.0f) throw DataError("generate_synthetic: noise_sigma must be non-negative");

    Rng rng(seed);
    Rng sig_rng = rng.fork(1);
    Rng noise_rng = rng.fork(2);

    // One random unit direction per class, scaled by the separation.
    std::vector<std::vector<float>> signatures(static_cast<std::size_t>(num_classes));
    for (int k = 0; k < num_classes; ++k) {
        std::vector<double> dir(static_cast<std::size_t>(bands));
        double norm = 0.0;
        for (auto& d : dir) {
            d = sig_rng.normal();
            norm += d * d;
        }
        norm = std::sqrt(std::max(norm, 1e-12));
        auto& sig = signatures[static_cast<std::size_t>(k)];
        sig.resize(static_cast<std::size_t>(bands));
        for (int i = 0; i < bands; ++i)
            sig[static_cast<std::size_t>(i)] = static_cast<float>(class_separation * dir[static_cast<std::size_t>(i)] / norm);
    }

    // Tile the image into ceil(sqrt(K)) x ceil(sqrt(K)) blocks, class per block.
    int grid = 1;
    while (grid * grid < num_classes) ++grid;

    HsiCube cube{height, width, bands, Tensor::zeros({height, width, bands})};
    LabelMap labels{height, width, num_classes, std::vector<std::uint16_t>(static_cast<std::size_t>(height) * width, 0)};
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const int br = std::min(r * grid / height, grid - 1);
            const int bc = std::min(c * grid / width, grid - 1);
            const int k = (br * grid + bc) % num_classes;
            labels.labels[static_cast<std::size_t>(r) * width + c] = static_cast<std::uint16_t>(k + 1);
            float* px = &cube.values.data[(static_cast<std::size_t>(r) * width + c) * bands];
            const auto& sig = signatures[static_cast<std::size_t>(k)];
            for (int b = 0; b < bands; ++b)
                px[b] = sig[static_cast<std::size_t>(b)] +
                        (noise_sigma > 0.0f ? static_cast<float>(noise_rng.normal(0.0, noise_sigma)) : 0.0f);
        }
    }
    return {std::move(cube), std::move(labels)};
}

}  // namespace spikegrid
