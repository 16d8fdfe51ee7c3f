#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrd {

/// Error taxonomy shared by the whole pipeline. The CLI maps InvalidInput
/// and Io to exit code 2, Backend and Computation to exit code 3.
enum class ErrorKind {
    InvalidInput,
    Io,
    Backend,
    Computation,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

using Dims = std::array<int, 3>;
using Spacing = std::array<double, 3>;

inline std::int64_t voxel_count(const Dims& d) {
    return static_cast<std::int64_t>(d[0]) * d[1] * d[2];
}

inline std::int64_t flat_index(const Dims& d, int x, int y, int z) {
    return static_cast<std::int64_t>(z) * d[1] * d[0] +
           static_cast<std::int64_t>(y) * d[0] + x;
}

/// Scalar 3D image in the canonical patient frame. Voxels are stored
/// x-fastest (x, then y, then z). Intensities are kept as float64 so that
/// normalization and fusion arithmetic stay exact at the 1e-9 contracts;
/// the portable on-disk format is float32.
struct Volume3D {
    Dims dims{0, 0, 0};
    Spacing spacing{1.0, 1.0, 1.0};
    std::string orientation = "LPS";
    std::vector<double> voxels;

    double at(int x, int y, int z) const { return voxels[flat_index(dims, x, y, z)]; }
    double& at(int x, int y, int z) { return voxels[flat_index(dims, x, y, z)]; }
    std::int64_t size() const { return static_cast<std::int64_t>(voxels.size()); }
};

/// Voxel mask; every value is exactly 0 or 1. Dims match the companion
/// volume when the mask was derived from one.
struct BinaryMask3D {
    Dims dims{0, 0, 0};
    std::vector<std::uint8_t> voxels;

    std::uint8_t at(int x, int y, int z) const { return voxels[flat_index(dims, x, y, z)]; }
    std::uint8_t& at(int x, int y, int z) { return voxels[flat_index(dims, x, y, z)]; }

    std::int64_t count() const {
        std::int64_t n = 0;
        for (std::uint8_t v : voxels) n += v;
        return n;
    }
};

inline std::string dims_to_string(const Dims& d) {
    return std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" + std::to_string(d[2]);
}

/// Throws InvalidInput unless the volume satisfies the type invariants.
void validate_volume(const Volume3D& v, const std::string& context = "volume");

/// Throws InvalidInput unless the mask satisfies the type invariants
/// (positive dims, matching voxel count, values restricted to {0,1}).
void validate_mask(const BinaryMask3D& m, const std::string& context = "mask");

}  // namespace mrd
