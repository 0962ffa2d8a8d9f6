#include "spikegrid/hsi_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace spikegrid {

namespace {

void put_bytes(std::ofstream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void get_bytes(std::ifstream& is, void* p, std::size_t n, const char* what) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw IoError(std::string("unexpected end of file while reading ") + what);
}

void put_u16(std::ofstream& os, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>(v >> 8)};
    put_bytes(os, b, 2);
}

void put_u32(std::ofstream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    put_bytes(os, b, 4);
}

void put_u64(std::ofstream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    put_bytes(os, b, 8);
}

void put_f32(std::ofstream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(os, bits);
}

std::uint16_t get_u16(std::ifstream& is, const char* what) {
    unsigned char b[2];
    get_bytes(is, b, 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::ifstream& is, const char* what) {
    unsigned char b[4];
    get_bytes(is, b, 4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

std::uint64_t get_u64(std::ifstream& is, const char* what) {
    unsigned char b[8];
    get_bytes(is, b, 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

float get_f32(std::ifstream& is, const char* what) {
    const std::uint32_t bits = get_u32(is, what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

void check_magic(std::ifstream& is, const char* magic, const char* what) {
    char buf[4];
    get_bytes(is, buf, 4, what);
    if (std::memcmp(buf, magic, 4) != 0) throw IoError(std::string("bad magic bytes, not a ") + what + " file");
}

// Bulk little-endian f32/u16 block transfer; byte-swap fallback keeps the
// format well-defined on big-endian hosts.
void put_f32_block(std::ofstream& os, const float* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        put_bytes(os, data, n * 4);
    } else {
        for (std::size_t i = 0; i < n; ++i) put_f32(os, data[i]);
    }
}

void get_f32_block(std::ifstream& is, float* data, std::size_t n, const char* what) {
    if constexpr (std::endian::native == std::endian::little) {
        get_bytes(is, data, n * 4, what);
    } else {
        for (std::size_t i = 0; i < n; ++i) data[i] = get_f32(is, what);
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string() + " for reading");
    return is;
}

std::filesystem::path temp_sibling(const std::filesystem::path& path) {
    auto tmp = path;
    tmp += ".tmp";
    return tmp;
}

}  // namespace

void write_cube(const std::filesystem::path& path, const HsiCube& cube) {
    cube.validate();
    const auto tmp = temp_sibling(path);
    {
        auto os = open_out(tmp);
        put_bytes(os, "HSIC", 4);
        put_u16(os, 1);
        put_u32(os, static_cast<std::uint32_t>(cube.height));
        put_u32(os, static_cast<std::uint32_t>(cube.width));
        put_u32(os, static_cast<std::uint32_t>(cube.bands));
        put_f32_block(os, cube.values.data.data(), cube.values.data.size());
        if (!os) throw IoError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

HsiCube read_cube(const std::filesystem::path& path) {
    auto is = open_in(path);
    check_magic(is, "HSIC", "HSIC cube");
    const auto version = get_u16(is, "cube version");
    if (version != 1) throw IoError("unsupported cube version " + std::to_string(version));
    HsiCube cube;
    cube.height = static_cast<int>(get_u32(is, "cube height"));
    cube.width = static_cast<int>(get_u32(is, "cube width"));
    cube.bands = static_cast<int>(get_u32(is, "cube bands"));
    if (cube.height < 1 || cube.width < 1 || cube.bands < 1) throw IoError("cube header has empty dimensions");
    cube.values = Tensor::zeros({cube.height, cube.width, cube.bands});
    get_f32_block(is, cube.values.data.data(), cube.values.data.size(), "cube samples");
    cube.validate();
    return cube;
}

void write_labels(const std::filesystem::path& path, const LabelMap& labels) {
    labels.validate();
    const auto tmp = temp_sibling(path);
    {
        auto os = open_out(tmp);
        put_bytes(os, "HSIL", 4);
        put_u16(os, 1);
        put_u32(os, static_cast<std::uint32_t>(labels.height));
        put_u32(os, static_cast<std::uint32_t>(labels.width));
        put_u16(os, static_cast<std::uint16_t>(labels.num_classes));
        for (auto l : labels.labels) put_u16(os, l);
        if (!os) throw IoError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

LabelMap read_labels(const std::filesystem::path& path) {
    auto is = open_in(path);
    check_magic(is, "HSIL", "HSIL labels");
    const auto version = get_u16(is, "label version");
    if (version != 1) throw IoError("unsupported label version " + std::to_string(version));
    LabelMap labels;
    labels.height = static_cast<int>(get_u32(is, "label height"));
    labels.width = static_cast<int>(get_u32(is, "label width"));
    labels.num_classes = get_u16(is, "label classes");
    labels.labels.resize(static_cast<std::size_t>(labels.height) * labels.width);
    for (auto& l : labels.labels) l = get_u16(is, "label value");
    labels.validate();
    return labels;
}

void write_checkpoint(const std::filesystem::path& path, const ParamStore& params, std::uint64_t schema_hash) {
    const auto tmp = temp_sibling(path);
    {
        auto os = open_out(tmp);
        put_bytes(os, "SGCK", 4);
        put_u16(os, 1);
        put_u64(os, schema_hash);
        put_u32(os, static_cast<std::uint32_t>(params.count()));
        for (const auto& e : params.entries) {
            put_u16(os, static_cast<std::uint16_t>(e.name.size()));
            put_bytes(os, e.name.data(), e.name.size());
            put_u16(os, static_cast<std::uint16_t>(e.value.rank()));
            for (int d : e.value.shape) put_u32(os, static_cast<std::uint32_t>(d));
            put_f32_block(os, e.value.data.data(), e.value.data.size());
        }
        if (!os) throw IoError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    auto is = open_in(path);
    check_magic(is, "SGCK", "checkpoint");
    const auto version = get_u16(is, "checkpoint version");
    if (version != 1) throw IoError("unsupported checkpoint version " + std::to_string(version));
    Checkpoint ck;
    ck.schema_hash = get_u64(is, "schema hash");
    const auto count = get_u32(is, "tensor count");
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = get_u16(is, "tensor name length");
        std::string name(name_len, '\0');
        get_bytes(is, name.data(), name_len, "tensor name");
        const auto rank = get_u16(is, "tensor rank");
        std::vector<int> shape(rank);
        for (auto& d : shape) d = static_cast<int>(get_u32(is, "tensor dim"));
        Tensor t = Tensor::zeros(shape);
        get_f32_block(is, t.data.data(), t.data.size(), "tensor data");
        ck.params.add(std::move(name), std::move(t));
    }
    return ck;
}

void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = temp_sibling(path);
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
        os << content;
        if (!os) throw IoError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace spikegrid
