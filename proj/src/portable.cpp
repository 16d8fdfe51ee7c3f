#include "mrd/portable.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mrd/keyvalue.hpp"

namespace mrd::io {

namespace {

static_assert(std::endian::native == std::endian::little,
              "portable format I/O assumes a little-endian host");
static_assert(sizeof(float) == 4);

std::string format_spacing(const Spacing& s) {
    std::ostringstream oss;
    oss.precision(17);
    oss << s[0] << " " << s[1] << " " << s[2];
    return oss.str();
}

std::filesystem::path data_path_for(const std::filesystem::path& header_path,
                                    const std::string& data_file) {
    std::filesystem::path p(data_file);
    if (p.is_absolute()) return p;
    return header_path.parent_path() / p;
}

void write_header(const std::filesystem::path& header_path, const Dims& dims,
                  const Spacing& spacing, const std::string& dtype,
                  const std::string& data_file) {
    kv::write_file(header_path,
                   {{"dims", std::to_string(dims[0]) + " " + std::to_string(dims[1]) + " " +
                                 std::to_string(dims[2])},
                    {"spacing_mm", format_spacing(spacing)},
                    {"orientation", "LPS"},
                    {"dtype", dtype},
                    {"data_file", data_file}});
}

struct Header {
    Dims dims;
    Spacing spacing;
    std::string orientation;
    std::string dtype;
    std::filesystem::path data_path;
};

Header read_header(const std::filesystem::path& header_path) {
    if (!std::filesystem::exists(header_path))
        fail(ErrorKind::Io, "no such file: " + header_path.string());
    auto kv = kv::KeyValueFile::parse_file(header_path);
    Header h;
    auto dims = kv.get_ints("dims", 3);
    for (int k = 0; k < 3; ++k) {
        if (dims[k] < 1)
            fail(ErrorKind::InvalidInput, header_path.string() + ": dims must be >= 1");
        h.dims[k] = static_cast<int>(dims[k]);
    }
    auto sp = kv.get_doubles("spacing_mm", 3);
    for (int k = 0; k < 3; ++k) {
        if (!(sp[k] > 0.0))
            fail(ErrorKind::InvalidInput, header_path.string() + ": spacing_mm must be > 0");
        h.spacing[k] = sp[k];
    }
    h.orientation = kv.get("orientation");
    h.dtype = kv.get("dtype");
    if (h.dtype != "f32" && h.dtype != "u8")
        fail(ErrorKind::InvalidInput, header_path.string() + ": unsupported dtype `" + h.dtype + "`");
    h.data_path = data_path_for(header_path, kv.get("data_file"));
    return h;
}

std::vector<char> read_raw(const std::filesystem::path& path, std::int64_t expected_bytes,
                           const std::string& context) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, context + ": cannot open data file " + path.string());
    in.seekg(0, std::ios::end);
    std::int64_t size = in.tellg();
    if (size != expected_bytes)
        fail(ErrorKind::InvalidInput,
             context + ": element-count mismatch, data file " + path.string() + " holds " +
                 std::to_string(size) + " bytes but header requires " +
                 std::to_string(expected_bytes));
    in.seekg(0);
    std::vector<char> buf(static_cast<std::size_t>(size));
    in.read(buf.data(), size);
    if (!in) fail(ErrorKind::Io, context + ": short read from " + path.string());
    return buf;
}

void write_raw(const std::filesystem::path& path, const char* data, std::int64_t bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out.write(data, bytes);
    if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace

void save_portable_volume(const Volume3D& v, const std::filesystem::path& header_path) {
    validate_volume(v, "save_portable_volume");
    std::string data_file = header_path.stem().string() + ".raw";
    write_header(header_path, v.dims, v.spacing, "f32", data_file);

    std::vector<float> f32(v.voxels.size());
    for (std::size_t i = 0; i < v.voxels.size(); ++i) f32[i] = static_cast<float>(v.voxels[i]);
    write_raw(data_path_for(header_path, data_file),
              reinterpret_cast<const char*>(f32.data()),
              static_cast<std::int64_t>(f32.size() * sizeof(float)));
}

Volume3D load_portable_volume(const std::filesystem::path& header_path) {
    Header h = read_header(header_path);
    if (h.dtype != "f32")
        fail(ErrorKind::InvalidInput,
             header_path.string() + ": expected dtype f32 for a volume, got " + h.dtype);
    std::int64_t n = voxel_count(h.dims);
    auto raw = read_raw(h.data_path, n * 4, header_path.string());
    Volume3D v;
    v.dims = h.dims;
    v.spacing = h.spacing;
    v.orientation = h.orientation;
    v.voxels.resize(static_cast<std::size_t>(n));
    const float* f32 = reinterpret_cast<const float*>(raw.data());
    for (std::int64_t i = 0; i < n; ++i) v.voxels[static_cast<std::size_t>(i)] = f32[i];
    return v;
}

void save_mask(const BinaryMask3D& m, const std::filesystem::path& header_path) {
    validate_mask(m, "save_mask");
    std::string data_file = header_path.stem().string() + ".raw";
    write_header(header_path, m.dims, {1.0, 1.0, 1.0}, "u8", data_file);
    write_raw(data_path_for(header_path, data_file),
              reinterpret_cast<const char*>(m.voxels.data()),
              static_cast<std::int64_t>(m.voxels.size()));
}

BinaryMask3D load_mask(const std::filesystem::path& header_path) {
    Header h = read_header(header_path);
    if (h.dtype != "u8")
        fail(ErrorKind::InvalidInput,
             header_path.string() + ": expected dtype u8 for a mask, got " + h.dtype);
    std::int64_t n = voxel_count(h.dims);
    auto raw = read_raw(h.data_path, n, header_path.string());
    BinaryMask3D m;
    m.dims = h.dims;
    m.voxels.resize(static_cast<std::size_t>(n));
    std::memcpy(m.voxels.data(), raw.data(), static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        if (m.voxels[static_cast<std::size_t>(i)] > 1)
            fail(ErrorKind::InvalidInput,
                 header_path.string() + ": non-binary value " +
                     std::to_string(int(m.voxels[static_cast<std::size_t>(i)])) +
                     " at voxel " + std::to_string(i));
    return m;
}

}  // namespace mrd::io
