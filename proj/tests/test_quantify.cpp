#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>

#include "mrd/density.hpp"
#include "mrd/metrics.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using mrd::quant::Axis;

namespace {

mrd::ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const mrd::Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return mrd::ErrorKind::InvalidInput;
}

mrd::BinaryMask3D mask_from(const mrd::Dims& dims, std::vector<std::uint8_t> voxels) {
    mrd::BinaryMask3D m;
    m.dims = dims;
    m.voxels = std::move(voxels);
    return m;
}

mrd::BinaryMask3D single_voxel(const mrd::Dims& dims, int x, int y, int z) {
    mrd::BinaryMask3D m;
    m.dims = dims;
    m.voxels.assign(static_cast<std::size_t>(mrd::voxel_count(dims)), 0);
    m.at(x, y, z) = 1;
    return m;
}

/// Random dense-in-breast pair with the containment the pipeline guarantees.
std::pair<mrd::BinaryMask3D, mrd::BinaryMask3D> random_pair(std::mt19937_64& rng,
                                                            const mrd::Dims& dims) {
    auto breast = testutil::random_mask(rng, dims, 0.5);
    auto dense = breast;
    for (auto& v : dense.voxels)
        if (v && testutil::uniform01(rng) < 0.6) v = 0;
    return {std::move(dense), std::move(breast)};
}

}  // namespace

TEST_CASE("density is the voxel-count ratio of dense to breast") {
    mrd::Dims dims{5, 5, 5};
    mrd::BinaryMask3D breast;
    breast.dims = dims;
    breast.voxels.assign(125, 1);
    mrd::BinaryMask3D dense;
    dense.dims = dims;
    dense.voxels.assign(125, 0);
    for (int i = 0; i < 13; ++i) dense.voxels[static_cast<std::size_t>(i * 7)] = 1;

    auto rec = mrd::quant::compute_density(dense, breast);
    CHECK(rec.dense_voxels == 13);
    CHECK(rec.breast_voxels == 125);
    CHECK(rec.density == 13.0 / 125.0);
    CHECK(rec.density == doctest::Approx(0.104).epsilon(1e-12));
}

TEST_CASE("density edge values are exact") {
    mrd::Dims dims{3, 3, 3};
    mrd::BinaryMask3D breast;
    breast.dims = dims;
    breast.voxels.assign(27, 1);
    mrd::BinaryMask3D none;
    none.dims = dims;
    none.voxels.assign(27, 0);
    CHECK(mrd::quant::compute_density(none, breast).density == 0.0);
    CHECK(mrd::quant::compute_density(breast, breast).density == 1.0);
}

TEST_CASE("density validates its inputs") {
    mrd::Dims dims{3, 3, 3};
    mrd::BinaryMask3D empty;
    empty.dims = dims;
    empty.voxels.assign(27, 0);
    mrd::BinaryMask3D full;
    full.dims = dims;
    full.voxels.assign(27, 1);

    SUBCASE("empty breast mask") {
        CHECK(kind_of([&] { mrd::quant::compute_density(empty, empty); }) ==
              mrd::ErrorKind::InvalidInput);
    }
    SUBCASE("dims mismatch") {
        mrd::BinaryMask3D other;
        other.dims = {3, 3, 2};
        other.voxels.assign(18, 1);
        CHECK(kind_of([&] { mrd::quant::compute_density(other, full); }) ==
              mrd::ErrorKind::InvalidInput);
    }
    SUBCASE("dense voxel outside the breast") {
        auto dense = single_voxel(dims, 0, 0, 0);
        auto breast = single_voxel(dims, 2, 2, 2);
        CHECK(kind_of([&] { mrd::quant::compute_density(dense, breast); }) ==
              mrd::ErrorKind::InvalidInput);
    }
}

TEST_CASE("slice profiles flag empty slices instead of reporting zeros") {
    // Breast occupies z = 1 and z = 2 only; z = 0 and z = 3 must come back
    // flagged, not as density 0.
    mrd::Dims dims{2, 2, 4};
    mrd::BinaryMask3D breast;
    breast.dims = dims;
    breast.voxels.assign(16, 0);
    for (int z = 1; z <= 2; ++z)
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 2; ++x) breast.at(x, y, z) = 1;
    mrd::BinaryMask3D dense;
    dense.dims = dims;
    dense.voxels.assign(16, 0);
    dense.at(0, 0, 1) = 1;
    dense.at(1, 1, 1) = 1;
    dense.at(0, 1, 2) = 1;

    auto prof = mrd::quant::slice_density_profile(dense, breast, Axis::Z);
    REQUIRE(prof.per_slice.size() == 4);
    CHECK(prof.per_slice[0].empty);
    CHECK(prof.per_slice[3].empty);
    CHECK_FALSE(prof.per_slice[1].empty);
    CHECK(prof.per_slice[1].dense_voxels == 2);
    CHECK(prof.per_slice[1].breast_voxels == 4);
    CHECK(prof.per_slice[1].density == 0.5);
    CHECK(prof.per_slice[2].density == 0.25);
    CHECK(prof.volumetric_density == 3.0 / 8.0);
}

TEST_CASE("count-weighted slice aggregation reproduces the volumetric ratio exactly") {
    std::mt19937_64 rng(201);
    for (int trial = 0; trial < 30; ++trial) {
        mrd::Dims dims{testutil::uniform_int(rng, 2, 10), testutil::uniform_int(rng, 2, 10),
                       testutil::uniform_int(rng, 2, 10)};
        auto [dense, breast] = random_pair(rng, dims);
        if (breast.count() == 0) continue;
        for (Axis ax : {Axis::X, Axis::Y, Axis::Z}) {
            auto prof = mrd::quant::slice_density_profile(dense, breast, ax);
            std::int64_t dsum = 0, bsum = 0;
            for (const auto& s : prof.per_slice) {
                if (s.empty) {
                    CHECK(s.breast_voxels == 0);
                    continue;
                }
                dsum += s.dense_voxels;
                bsum += s.breast_voxels;
            }
            double aggregate =
                static_cast<double>(dsum) / static_cast<double>(bsum);
            CHECK(aggregate == prof.volumetric_density);
            CHECK(prof.volumetric_density ==
                  mrd::quant::compute_density(dense, breast).density);
        }
    }
}

TEST_CASE("profiles along x and y slice the expected planes") {
    mrd::Dims dims{3, 2, 2};
    auto breast = mask_from(dims, std::vector<std::uint8_t>(12, 1));
    auto dense = single_voxel(dims, 2, 1, 0);

    auto px = mrd::quant::slice_density_profile(dense, breast, Axis::X);
    REQUIRE(px.per_slice.size() == 3);
    CHECK(px.per_slice[2].dense_voxels == 1);
    CHECK(px.per_slice[2].breast_voxels == 4);
    CHECK(px.per_slice[0].dense_voxels == 0);

    auto py = mrd::quant::slice_density_profile(dense, breast, Axis::Y);
    REQUIRE(py.per_slice.size() == 2);
    CHECK(py.per_slice[1].dense_voxels == 1);
    CHECK(py.per_slice[1].breast_voxels == 6);
}

TEST_CASE("dice matches the set-overlap definition") {
    mrd::Dims dims{4, 4, 1};
    // |A| = 4, |B| = 6, |A∩B| = 3 → 2*3 / 10 = 0.6
    mrd::BinaryMask3D a;
    a.dims = dims;
    a.voxels.assign(16, 0);
    mrd::BinaryMask3D b;
    b.dims = dims;
    b.voxels.assign(16, 0);
    for (int i = 0; i < 4; ++i) a.voxels[static_cast<std::size_t>(i)] = 1;
    for (int i = 1; i < 7; ++i) b.voxels[static_cast<std::size_t>(i)] = 1;
    CHECK(mrd::quant::dice(a, b) == 0.6);
    CHECK(mrd::quant::dice(a, a) == 1.0);

    mrd::BinaryMask3D empty;
    empty.dims = dims;
    empty.voxels.assign(16, 0);
    CHECK(mrd::quant::dice(a, empty) == 0.0);
    CHECK(kind_of([&] { mrd::quant::dice(empty, empty); }) == mrd::ErrorKind::InvalidInput);
}

TEST_CASE("hausdorff distance on hand-checked configurations") {
    mrd::Dims dims{12, 12, 4};
    SUBCASE("3-4-5 triangle") {
        auto a = single_voxel(dims, 0, 0, 0);
        auto b = single_voxel(dims, 3, 4, 0);
        CHECK(mrd::quant::hausdorff(a, b) == 5.0);
    }
    SUBCASE("asymmetric sets take the worse direction") {
        auto a = single_voxel(dims, 0, 0, 0);
        a.at(10, 0, 0) = 1;
        auto b = single_voxel(dims, 0, 0, 0);
        CHECK(mrd::quant::hausdorff(a, b) == 10.0);
        CHECK(mrd::quant::hausdorff(b, a) == 10.0);  // symmetric by definition
    }
    SUBCASE("identical masks have zero distance") {
        std::mt19937_64 rng(202);
        auto m = testutil::random_mask(rng, dims, 0.3);
        if (m.count() == 0) m.at(1, 1, 1) = 1;
        CHECK(mrd::quant::hausdorff(m, m) == 0.0);
        CHECK(mrd::quant::dice(m, m) == 1.0);
    }
    SUBCASE("empty masks are rejected") {
        auto a = single_voxel(dims, 0, 0, 0);
        mrd::BinaryMask3D empty;
        empty.dims = dims;
        empty.voxels.assign(static_cast<std::size_t>(mrd::voxel_count(dims)), 0);
        CHECK(kind_of([&] { mrd::quant::hausdorff(a, empty); }) ==
              mrd::ErrorKind::InvalidInput);
        CHECK(kind_of([&] { mrd::quant::hausdorff(empty, a); }) ==
              mrd::ErrorKind::InvalidInput);
    }
}

TEST_CASE("hausdorff with anisotropic spacing weights each axis") {
    mrd::Dims dims{4, 4, 4};
    auto a = single_voxel(dims, 0, 0, 0);
    auto b = single_voxel(dims, 2, 0, 3);
    mrd::Spacing sp{0.5, 1.0, 2.0};
    double expect = std::sqrt(2 * 0.5 * (2 * 0.5) + (3 * 2.0) * (3 * 2.0));
    CHECK(mrd::quant::hausdorff(a, b, sp) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(kind_of([&] { mrd::quant::hausdorff(a, b, {1.0, 0.0, 1.0}); }) ==
          mrd::ErrorKind::InvalidInput);
}

TEST_CASE("distance-transform metrics equal the brute-force definitions") {
    std::mt19937_64 rng(203);
    for (int trial = 0; trial < 100; ++trial) {
        mrd::Dims dims{testutil::uniform_int(rng, 2, 16), testutil::uniform_int(rng, 2, 16),
                       testutil::uniform_int(rng, 1, 16)};
        double fill = 0.02 + 0.3 * testutil::uniform01(rng);
        auto a = testutil::random_mask(rng, dims, fill);
        auto b = testutil::random_mask(rng, dims, fill);
        if (a.count() == 0) a.at(0, 0, 0) = 1;
        if (b.count() == 0) b.at(dims[0] - 1, dims[1] - 1, dims[2] - 1) = 1;

        // Unit spacing: both sides reduce to integer squared distances, so
        // the results must be bitwise identical, not merely close.
        CHECK(mrd::quant::hausdorff(a, b) == oracle::brute_hausdorff(a, b));
        CHECK(mrd::quant::dice(a, b) == oracle::brute_dice(a, b));

        mrd::Spacing sp{0.5 + testutil::uniform01(rng), 0.5 + testutil::uniform01(rng),
                        0.5 + testutil::uniform01(rng)};
        double fast = mrd::quant::hausdorff(a, b, sp);
        double slow = oracle::brute_hausdorff(a, b, sp);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
    }
}

TEST_CASE("mask comparison bundles both metrics") {
    mrd::Dims dims{6, 6, 2};
    auto a = single_voxel(dims, 1, 1, 0);
    auto b = single_voxel(dims, 1, 1, 0);
    b.at(4, 5, 1) = 1;
    auto m = mrd::quant::compare_masks(a, b);
    CHECK(m.dsc == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(m.hd == oracle::brute_hausdorff(a, b));
}

TEST_CASE("side names match the reporting vocabulary") {
    CHECK(mrd::quant::side_name(mrd::quant::Side::Whole) == "whole");
    CHECK(mrd::quant::side_name(mrd::quant::Side::Left) == "left");
    CHECK(mrd::quant::side_name(mrd::quant::Side::Right) == "right");
    CHECK(mrd::quant::axis_name(Axis::Z) == "z");
    CHECK(mrd::quant::axis_name(Axis::X) == "x");
    CHECK(mrd::quant::axis_name(Axis::Y) == "y");
}
