#pragma once

#include <memory>

#include "mrd/core.hpp"
#include "mrd/fcm.hpp"
#include "mrd/fusion.hpp"
#include "mrd/normalize.hpp"

namespace mrd::seg {

enum class BackendKind { Fcm, Oracle, Import };

/// How the FCM backend turns cluster memberships into a tissue
/// probability. AboveBackground sums every cluster except the lowest
/// centroid (background); Indices sums an explicit cluster set;
/// NearestIntensity picks the single cluster whose centroid is closest to
/// a raw (un-normalized) calibration intensity.
struct FcmTarget {
    enum class Rule { AboveBackground, Indices, NearestIntensity };
    Rule rule = Rule::AboveBackground;
    std::vector<int> indices;
    double raw_intensity = 0.0;
};

struct FcmOptions {
    /// Where the fit samples come from: the whole volume, or only voxels
    /// inside the breast mask produced by the earlier stage (dense stage
    /// only). Restricting the fit keeps a dominant image background from
    /// swamping the within-breast tissue clusters.
    enum class FitDomain { WholeVolume, BreastMask };

    int clusters = 3;
    double fuzziness = 2.0;
    double tol = 1e-5;
    int max_iter = 300;
    std::int64_t max_fit_samples = std::int64_t(1) << 20;  // uniform stride subsample
    FcmTarget target;
    FitDomain fit_domain = FitDomain::WholeVolume;
};

/// Pluggable per-stage backend description. The oracle kind carries a
/// ground-truth mask (in memory or by path); the import kind reads a
/// portable f32 probability volume.
struct BackendSpec {
    BackendKind kind = BackendKind::Fcm;
    FcmOptions fcm{};
    BinaryMask3D oracle_mask{};   // used when non-empty
    std::string oracle_path{};    // loaded otherwise
    std::string import_path{};

    static BackendSpec make_fcm(FcmOptions opts = {});
    static BackendSpec make_oracle(BinaryMask3D mask);
    static BackendSpec make_oracle_path(std::string path);
    static BackendSpec make_import(std::string path);
};

/// Resolves a spec against a normalized volume: fits the FCM model, loads
/// oracle/import data, and checks dims. `norm` maps raw calibration
/// intensities into the normalized frame. `breast_mask` supplies the fit
/// domain for an FCM spec with FitDomain::BreastMask; it is required there
/// and ignored otherwise.
std::unique_ptr<PatchBackend> make_backend(const BackendSpec& spec, const Volume3D& normalized,
                                           const NormStats& norm,
                                           const BinaryMask3D* breast_mask = nullptr);

struct SegmentConfig {
    int patch_size = 96;
    std::array<int, 3> steps{8, 8, 3};
    double threshold = 0.5;
    int max_threads = 0;  // 0 = MRDENSITY_THREADS / hardware
};

struct SegmentationResult {
    BinaryMask3D breast;
    BinaryMask3D dense;
    PatchPlan plan;
    NormStats norm;
    std::string breast_backend;
    std::string dense_backend;
};

/// Two-stage pipeline: z-score normalize, plan patches, run sliding-window
/// inference per stage, binarize, and intersect the dense mask with the
/// breast mask so the density ratio is well defined. The stage-1 breast
/// mask is offered to the dense backend as its fit domain, so a dense FCM
/// spec may request FitDomain::BreastMask.
SegmentationResult segment_subject(const Volume3D& v, const BackendSpec& breast,
                                   const BackendSpec& dense, const SegmentConfig& cfg = {});

struct LateralitySplit {
    BinaryMask3D left;
    BinaryMask3D right;
};

/// Midsagittal split in the LPS frame: x-index >= nx/2 is patient left.
LateralitySplit split_laterality(const BinaryMask3D& mask);

}  // namespace mrd::seg
