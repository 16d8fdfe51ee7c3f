#include "mrd/dicom.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mrd::io {

namespace {

constexpr std::uint32_t kUndefinedLength = 0xFFFFFFFFu;

std::string tag_str(std::uint16_t group, std::uint16_t elem) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "(%04X,%04X)", group, elem);
    return buf;
}

struct ByteReader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos = 0;
    std::string file;

    bool eof() const { return pos >= size; }
    std::size_t remaining() const { return size - pos; }

    void need(std::size_t n, const char* what) const {
        if (pos + n > size)
            fail(ErrorKind::InvalidInput, file + ": truncated DICOM stream while reading " +
                                              std::string(what));
    }
    std::uint16_t u16() {
        need(2, "uint16");
        std::uint16_t v = static_cast<std::uint16_t>(data[pos] | (data[pos + 1] << 8));
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4, "uint32");
        std::uint32_t v = data[pos] | (data[pos + 1] << 8) | (data[pos + 2] << 16) |
                          (static_cast<std::uint32_t>(data[pos + 3]) << 24);
        pos += 4;
        return v;
    }
    void skip(std::size_t n, const char* what) {
        need(n, what);
        pos += n;
    }
};

bool is_known_vr(char a, char b) {
    static const char* vrs[] = {"AE", "AS", "AT", "CS", "DA", "DS", "DT", "FL", "FD", "IS",
                                "LO", "LT", "OB", "OD", "OF", "OL", "OW", "PN", "SH", "SL",
                                "SQ", "SS", "ST", "TM", "UC", "UI", "UL", "UN", "UR", "US",
                                "UT"};
    for (const char* vr : vrs)
        if (vr[0] == a && vr[1] == b) return true;
    return false;
}

bool vr_has_long_length(const char vr[2]) {
    static const char* longs[] = {"OB", "OD", "OF", "OL", "OW", "SQ", "UC", "UN", "UR", "UT"};
    for (const char* v : longs)
        if (v[0] == vr[0] && v[1] == vr[1]) return true;
    return false;
}

struct Element {
    std::uint16_t group = 0;
    std::uint16_t elem = 0;
    char vr[3] = "UN";
    std::uint32_t length = 0;
    std::size_t value_pos = 0;  // offset of the value in the stream
};

/// Reads one element header; cursor lands on the value.
Element read_element_header(ByteReader& r, bool explicit_vr) {
    Element e;
    e.group = r.u16();
    e.elem = r.u16();
    if (e.group == 0xFFFE) {  // item delimiters carry no VR in either syntax
        e.length = r.u32();
        e.value_pos = r.pos;
        return e;
    }
    if (explicit_vr) {
        r.need(2, "VR");
        e.vr[0] = static_cast<char>(r.data[r.pos]);
        e.vr[1] = static_cast<char>(r.data[r.pos + 1]);
        r.pos += 2;
        if (!is_known_vr(e.vr[0], e.vr[1]))
            fail(ErrorKind::InvalidInput,
                 r.file + ": malformed DICOM, unknown VR at tag " + tag_str(e.group, e.elem));
        if (vr_has_long_length(e.vr)) {
            r.skip(2, "VR padding");
            e.length = r.u32();
        } else {
            e.length = r.u16();
        }
    } else {
        e.length = r.u32();
    }
    e.value_pos = r.pos;
    return e;
}

void skip_undefined_sequence(ByteReader& r, bool explicit_vr);

/// Skips the value of the element the cursor currently points at.
void skip_value(ByteReader& r, const Element& e, bool explicit_vr) {
    if (e.length == kUndefinedLength) {
        if (e.vr[0] == 'S' && e.vr[1] == 'Q') {
            skip_undefined_sequence(r, explicit_vr);
        } else if (!explicit_vr) {
            // Implicit VR: undefined length outside an item means a sequence.
            skip_undefined_sequence(r, explicit_vr);
        } else {
            fail(ErrorKind::InvalidInput,
                 r.file + ": undefined-length element with VR " + e.vr + " at tag " +
                     tag_str(e.group, e.elem) + " (unsupported transfer syntax?)");
        }
    } else {
        r.skip(e.length, "element value");
    }
}

/// Cursor is just past an undefined-length SQ header; walks items until the
/// sequence delimiter. Item contents are datasets and may nest further
/// undefined-length sequences.
void skip_undefined_sequence(ByteReader& r, bool explicit_vr) {
    for (;;) {
        Element item = read_element_header(r, explicit_vr);
        if (item.group == 0xFFFE && item.elem == 0xE0DD) return;  // sequence delimiter
        if (item.group != 0xFFFE || item.elem != 0xE000)
            fail(ErrorKind::InvalidInput, r.file + ": malformed sequence item at " +
                                              tag_str(item.group, item.elem));
        if (item.length != kUndefinedLength) {
            r.skip(item.length, "sequence item");
        } else {
            for (;;) {  // undefined-length item: scan elements to the item delimiter
                Element sub = read_element_header(r, explicit_vr);
                if (sub.group == 0xFFFE && sub.elem == 0xE00D) break;
                skip_value(r, sub, explicit_vr);
            }
        }
    }
}

std::string trimmed_string(const ByteReader& r, const Element& e) {
    std::string s(reinterpret_cast<const char*>(r.data + e.value_pos), e.length);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.pop_back();
    std::size_t b = s.find_first_not_of(' ');
    return b == std::string::npos ? "" : s.substr(b);
}

std::vector<double> parse_ds(const std::string& s, const std::string& file,
                             const std::string& tag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, '\\')) {
        try {
            out.push_back(std::stod(part));
        } catch (const std::exception&) {
            fail(ErrorKind::InvalidInput, file + ": tag " + tag + " has non-numeric value `" +
                                              part + "`");
        }
    }
    return out;
}

struct SliceData {
    std::array<double, 3> position{};
    std::array<double, 6> orientation{};
    std::array<double, 2> pixel_spacing{};
    double slope = 1.0;
    double intercept = 0.0;
    int rows = 0;
    int cols = 0;
    std::vector<double> pixels;  // rescaled, row-major (columns fastest)
    std::string file;
};

SliceData parse_dicom_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

    ByteReader r{bytes.data(), bytes.size(), 0, path.filename().string()};

    bool explicit_vr = true;
    if (bytes.size() >= 132 && std::memcmp(bytes.data() + 128, "DICM", 4) == 0) {
        r.pos = 132;
        // File meta group (0002) is always explicit VR little endian. Peek
        // only the group number to find its end: the body that follows may
        // use a different VR convention, so its headers cannot be parsed yet.
        std::string transfer_syntax;
        while (r.pos + 2 <= r.size) {
            std::uint16_t group = static_cast<std::uint16_t>(r.data[r.pos] |
                                                             (r.data[r.pos + 1] << 8));
            if (group != 0x0002) break;
            Element e = read_element_header(r, /*explicit_vr=*/true);
            if (e.elem == 0x0010) transfer_syntax = trimmed_string(r, e);
            skip_value(r, e, true);
        }
        if (transfer_syntax == "1.2.840.10008.1.2")
            explicit_vr = false;
        else if (transfer_syntax == "1.2.840.10008.1.2.1")
            explicit_vr = true;
        else
            fail(ErrorKind::InvalidInput,
                 path.filename().string() + ": unsupported transfer syntax `" + transfer_syntax +
                     "` (only uncompressed little endian is supported)");
    } else {
        // Raw dataset without the part-10 preamble: sniff the VR bytes of
        // the first element.
        if (bytes.size() < 8)
            fail(ErrorKind::InvalidInput, path.filename().string() + ": not a DICOM file");
        explicit_vr = is_known_vr(static_cast<char>(bytes[4]), static_cast<char>(bytes[5]));
    }

    SliceData s;
    s.file = path.filename().string();
    int bits_allocated = 0;
    bool pixel_signed = false;
    bool have_position = false, have_orientation = false, have_spacing = false;
    bool have_rows = false, have_cols = false, have_pixels = false;
    const std::uint8_t* pixel_ptr = nullptr;
    std::uint32_t pixel_len = 0;

    while (!r.eof()) {
        Element e = read_element_header(r, explicit_vr);
        const std::string tag = tag_str(e.group, e.elem);
        auto text = [&] { return trimmed_string(r, e); };
        auto us_value = [&]() -> int {
            if (e.length < 2)
                fail(ErrorKind::InvalidInput, r.file + ": tag " + tag + " too short");
            return r.data[e.value_pos] | (r.data[e.value_pos + 1] << 8);
        };

        if (e.group == 0x0020 && e.elem == 0x0032) {
            auto v = parse_ds(text(), r.file, tag);
            if (v.size() != 3)
                fail(ErrorKind::InvalidInput, r.file + ": tag " + tag + " needs 3 values");
            s.position = {v[0], v[1], v[2]};
            have_position = true;
        } else if (e.group == 0x0020 && e.elem == 0x0037) {
            auto v = parse_ds(text(), r.file, tag);
            if (v.size() != 6)
                fail(ErrorKind::InvalidInput, r.file + ": tag " + tag + " needs 6 values");
            for (int k = 0; k < 6; ++k) s.orientation[k] = v[k];
            have_orientation = true;
        } else if (e.group == 0x0028 && e.elem == 0x0030) {
            auto v = parse_ds(text(), r.file, tag);
            if (v.size() != 2)
                fail(ErrorKind::InvalidInput, r.file + ": tag " + tag + " needs 2 values");
            s.pixel_spacing = {v[0], v[1]};
            have_spacing = true;
        } else if (e.group == 0x0028 && e.elem == 0x0010) {
            s.rows = us_value();
            have_rows = true;
        } else if (e.group == 0x0028 && e.elem == 0x0011) {
            s.cols = us_value();
            have_cols = true;
        } else if (e.group == 0x0028 && e.elem == 0x0008) {
            std::string nf = text();
            if (!nf.empty() && std::stol(nf) > 1)
                fail(ErrorKind::InvalidInput,
                     r.file + ": multi-frame DICOM is not supported (NumberOfFrames=" + nf + ")");
        } else if (e.group == 0x0028 && e.elem == 0x0100) {
            bits_allocated = us_value();
        } else if (e.group == 0x0028 && e.elem == 0x0103) {
            pixel_signed = us_value() == 1;
        } else if (e.group == 0x0028 && e.elem == 0x1052) {
            auto v = parse_ds(text(), r.file, tag);
            if (!v.empty()) s.intercept = v[0];
        } else if (e.group == 0x0028 && e.elem == 0x1053) {
            auto v = parse_ds(text(), r.file, tag);
            if (!v.empty()) s.slope = v[0];
        } else if (e.group == 0x7FE0 && e.elem == 0x0010) {
            if (e.length == kUndefinedLength)
                fail(ErrorKind::InvalidInput,
                     r.file + ": encapsulated pixel data (unsupported transfer syntax)");
            pixel_ptr = r.data + e.value_pos;
            pixel_len = e.length;
            have_pixels = true;
        }
        skip_value(r, e, explicit_vr);
        if (have_pixels) break;  // pixel data is last in uncompressed files
    }

    auto require = [&](bool ok, const char* tag_name, const std::string& t) {
        if (!ok)
            fail(ErrorKind::InvalidInput,
                 s.file + ": missing required tag " + t + " " + tag_name);
    };
    require(have_position, "ImagePositionPatient", "(0020,0032)");
    require(have_orientation, "ImageOrientationPatient", "(0020,0037)");
    require(have_spacing, "PixelSpacing", "(0028,0030)");
    require(have_rows, "Rows", "(0028,0010)");
    require(have_cols, "Columns", "(0028,0011)");
    require(have_pixels, "PixelData", "(7FE0,0010)");

    if (bits_allocated == 0) bits_allocated = 16;
    if (bits_allocated != 8 && bits_allocated != 16)
        fail(ErrorKind::InvalidInput,
             s.file + ": unsupported BitsAllocated " + std::to_string(bits_allocated));
    if (s.rows < 1 || s.cols < 1)
        fail(ErrorKind::InvalidInput, s.file + ": Rows/Columns must be >= 1");

    const std::int64_t npix = static_cast<std::int64_t>(s.rows) * s.cols;
    const std::int64_t need_bytes = npix * (bits_allocated / 8);
    if (pixel_len < need_bytes)
        fail(ErrorKind::InvalidInput,
             s.file + ": pixel data holds " + std::to_string(pixel_len) + " bytes, need " +
                 std::to_string(need_bytes));

    s.pixels.resize(static_cast<std::size_t>(npix));
    if (bits_allocated == 16) {
        for (std::int64_t i = 0; i < npix; ++i) {
            std::uint16_t raw = static_cast<std::uint16_t>(pixel_ptr[2 * i] |
                                                           (pixel_ptr[2 * i + 1] << 8));
            double v = pixel_signed ? static_cast<double>(static_cast<std::int16_t>(raw))
                                    : static_cast<double>(raw);
            s.pixels[static_cast<std::size_t>(i)] = v * s.slope + s.intercept;
        }
    } else {
        for (std::int64_t i = 0; i < npix; ++i) {
            double v = pixel_signed ? static_cast<double>(static_cast<std::int8_t>(pixel_ptr[i]))
                                    : static_cast<double>(pixel_ptr[i]);
            s.pixels[static_cast<std::size_t>(i)] = v * s.slope + s.intercept;
        }
    }
    return s;
}

std::array<double, 3> cross(const double* a, const double* b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

int dominant_axis(const double* v) {
    int best = 0;
    for (int k = 1; k < 3; ++k)
        if (std::abs(v[k]) > std::abs(v[best])) best = k;
    return best;
}

}  // namespace

std::pair<Volume3D, SeriesMeta> load_dicom_series(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        fail(ErrorKind::Io, "not a directory: " + dir.string());

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.size() < 2)
        fail(ErrorKind::InvalidInput,
             dir.string() + ": a series needs >= 2 DICOM files, found " +
                 std::to_string(files.size()));

    std::vector<SliceData> slices;
    slices.reserve(files.size());
    for (const auto& f : files) slices.push_back(parse_dicom_file(f));

    const SliceData& first = slices.front();
    for (const SliceData& s : slices) {
        if (s.rows != first.rows || s.cols != first.cols)
            fail(ErrorKind::InvalidInput,
                 s.file + ": inconsistent Rows/Columns across series (" +
                     std::to_string(s.rows) + "x" + std::to_string(s.cols) + " vs " +
                     std::to_string(first.rows) + "x" + std::to_string(first.cols) + ")");
        if (std::abs(s.pixel_spacing[0] - first.pixel_spacing[0]) > 1e-6 ||
            std::abs(s.pixel_spacing[1] - first.pixel_spacing[1]) > 1e-6)
            fail(ErrorKind::InvalidInput, s.file + ": inconsistent PixelSpacing across series");
        for (int k = 0; k < 6; ++k)
            if (std::abs(s.orientation[k] - first.orientation[k]) > 1e-3)
                fail(ErrorKind::InvalidInput,
                     s.file + ": inconsistent ImageOrientationPatient across series");
    }

    const double* row_cos = first.orientation.data();
    const double* col_cos = first.orientation.data() + 3;
    auto norm3 = [](const double* v) {
        return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    };
    if (std::abs(norm3(row_cos) - 1.0) > 1e-3 || std::abs(norm3(col_cos) - 1.0) > 1e-3)
        fail(ErrorKind::InvalidInput,
             first.file + ": orientation cosines (0020,0037) are not unit vectors");

    // Canonical LPS assembly handles axial acquisitions with any axis sign;
    // oblique/sagittal/coronal series are rejected.
    if (dominant_axis(row_cos) != 0 || dominant_axis(col_cos) != 1)
        fail(ErrorKind::InvalidInput,
             first.file + ": unsupported orientation, series is not axial (rows must map to x, "
                          "columns to y)");
    const bool flip_x = row_cos[0] < 0.0;
    const bool flip_y = col_cos[1] < 0.0;
    const auto normal = cross(row_cos, col_cos);

    // Sort along the slice normal, then reverse when the normal points in
    // negative patient z so the final order ascends in z.
    std::vector<std::size_t> order(slices.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& pa = slices[a].position;
        const auto& pb = slices[b].position;
        double da = pa[0] * normal[0] + pa[1] * normal[1] + pa[2] * normal[2];
        double db = pb[0] * normal[0] + pb[1] * normal[1] + pb[2] * normal[2];
        return da < db;
    });
    if (normal[2] < 0.0) std::reverse(order.begin(), order.end());

    SeriesMeta meta;
    meta.orientation_cosines = first.orientation;
    meta.pixel_spacing = first.pixel_spacing;
    meta.rescale = {first.slope, first.intercept};
    for (std::size_t idx : order) {
        meta.slice_positions.push_back(slices[idx].position[2]);
        meta.source_ids.push_back(slices[idx].file);
    }
    for (std::size_t i = 1; i < meta.slice_positions.size(); ++i) {
        double dz = meta.slice_positions[i] - meta.slice_positions[i - 1];
        if (std::abs(dz) < 1e-9)
            fail(ErrorKind::InvalidInput,
                 dir.string() + ": duplicate slice z position " +
                     std::to_string(meta.slice_positions[i]) + " (" + meta.source_ids[i - 1] +
                     ", " + meta.source_ids[i] + ")");
        if (dz < 0.0)
            fail(ErrorKind::InvalidInput,
                 dir.string() + ": slice z positions do not ascend after sorting");
    }

    Volume3D v;
    v.dims = {first.cols, first.rows, static_cast<int>(slices.size())};
    double dz_sum = 0.0;
    for (std::size_t i = 1; i < meta.slice_positions.size(); ++i)
        dz_sum += meta.slice_positions[i] - meta.slice_positions[i - 1];
    double sz = meta.slice_positions.size() > 1
                    ? dz_sum / static_cast<double>(meta.slice_positions.size() - 1)
                    : 1.0;
    // PixelSpacing is (row spacing, column spacing): rows step along y,
    // columns along x.
    v.spacing = {first.pixel_spacing[1], first.pixel_spacing[0], sz};
    v.orientation = "LPS";
    v.voxels.resize(static_cast<std::size_t>(voxel_count(v.dims)));

    const int nx = v.dims[0], ny = v.dims[1];
    for (std::size_t zi = 0; zi < order.size(); ++zi) {
        const SliceData& s = slices[order[zi]];
        for (int y = 0; y < ny; ++y) {
            int r = flip_y ? ny - 1 - y : y;
            for (int x = 0; x < nx; ++x) {
                int c = flip_x ? nx - 1 - x : x;
                v.voxels[static_cast<std::size_t>(
                    flat_index(v.dims, x, y, static_cast<int>(zi)))] =
                    s.pixels[static_cast<std::size_t>(r) * nx + c];
            }
        }
    }
    return {std::move(v), std::move(meta)};
}

}  // namespace mrd::io
