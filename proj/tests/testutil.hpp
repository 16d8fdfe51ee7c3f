#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "mrd/core.hpp"

namespace testutil {

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& label) {
        auto base = std::filesystem::temp_directory_path();
        static std::atomic<unsigned> counter{0};
        for (;;) {
            auto candidate = base / (label + "-" + std::to_string(::getpid()) + "-" +
                                     std::to_string(counter.fetch_add(1)));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

/// Uniform double in [0,1) with full 53-bit resolution; avoids the
/// implementation-defined std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline mrd::BinaryMask3D random_mask(std::mt19937_64& rng, const mrd::Dims& dims,
                                     double fill_probability) {
    mrd::BinaryMask3D m;
    m.dims = dims;
    m.voxels.resize(static_cast<std::size_t>(mrd::voxel_count(dims)));
    for (auto& v : m.voxels) v = uniform01(rng) < fill_probability ? 1 : 0;
    return m;
}

inline mrd::Volume3D random_volume(std::mt19937_64& rng, const mrd::Dims& dims, double lo,
                                   double hi) {
    mrd::Volume3D v;
    v.dims = dims;
    v.voxels.resize(static_cast<std::size_t>(mrd::voxel_count(dims)));
    for (auto& x : v.voxels) x = lo + (hi - lo) * uniform01(rng);
    return v;
}

}  // namespace testutil
