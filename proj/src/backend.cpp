#include "mrd/backend.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "mrd/portable.hpp"

namespace mrd::seg {

BackendSpec BackendSpec::make_fcm(FcmOptions opts) {
    BackendSpec s;
    s.kind = BackendKind::Fcm;
    s.fcm = std::move(opts);
    return s;
}

BackendSpec BackendSpec::make_oracle(BinaryMask3D mask) {
    BackendSpec s;
    s.kind = BackendKind::Oracle;
    s.oracle_mask = std::move(mask);
    return s;
}

BackendSpec BackendSpec::make_oracle_path(std::string path) {
    BackendSpec s;
    s.kind = BackendKind::Oracle;
    s.oracle_path = std::move(path);
    return s;
}

BackendSpec BackendSpec::make_import(std::string path) {
    BackendSpec s;
    s.kind = BackendKind::Import;
    s.import_path = std::move(path);
    return s;
}

namespace {

/// Predicts the stored per-voxel value at the patch's location; voxels in
/// the padding margin (outside the stored dims) predict 0.
class VolumeLookupBackend : public PatchBackend {
public:
    VolumeLookupBackend(std::string name, Dims dims, std::vector<double> values)
        : name_(std::move(name)), dims_(dims), values_(std::move(values)) {}

    std::string name() const override { return name_; }

    void predict(const PatchInput& in, std::span<double> out) const override {
        const int P = in.patch_size;
        std::size_t w = 0;
        for (int z = 0; z < P; ++z) {
            const int vz = in.origin[2] + z;
            for (int y = 0; y < P; ++y) {
                const int vy = in.origin[1] + y;
                for (int x = 0; x < P; ++x, ++w) {
                    const int vx = in.origin[0] + x;
                    if (vx < dims_[0] && vy < dims_[1] && vz < dims_[2])
                        out[w] = values_[static_cast<std::size_t>(flat_index(dims_, vx, vy, vz))];
                    else
                        out[w] = 0.0;
                }
            }
        }
    }

private:
    std::string name_;
    Dims dims_;
    std::vector<double> values_;
};

class FcmBackend : public PatchBackend {
public:
    FcmBackend(FcmModel model, std::vector<int> targets)
        : model_(std::move(model)), targets_(std::move(targets)) {}

    std::string name() const override { return "fcm"; }

    void predict(const PatchInput& in, std::span<double> out) const override {
        std::vector<double> u(model_.centroids.size());
        for (std::size_t i = 0; i < in.intensities.size(); ++i) {
            fcm_memberships(model_, in.intensities[i], u);
            double p = 0.0;
            for (int t : targets_) p += u[static_cast<std::size_t>(t)];
            out[i] = p;
        }
    }

    const FcmModel& model() const { return model_; }

private:
    FcmModel model_;
    std::vector<int> targets_;
};

std::vector<double> strided_subsample(const std::vector<double>& voxels, std::int64_t cap) {
    const auto n = static_cast<std::int64_t>(voxels.size());
    if (n <= cap) return voxels;
    const std::int64_t stride = (n + cap - 1) / cap;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n / stride + 1));
    for (std::int64_t i = 0; i < n; i += stride) out.push_back(voxels[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<int> resolve_targets(const FcmTarget& target, const FcmModel& model,
                                 const NormStats& norm) {
    const int c = static_cast<int>(model.centroids.size());
    switch (target.rule) {
        case FcmTarget::Rule::AboveBackground: {
            std::vector<int> all;
            for (int j = 1; j < c; ++j) all.push_back(j);
            if (all.empty())
                fail(ErrorKind::InvalidInput,
                     "fcm backend: above-background target needs >= 2 clusters");
            return all;
        }
        case FcmTarget::Rule::Indices: {
            if (target.indices.empty())
                fail(ErrorKind::InvalidInput, "fcm backend: empty target cluster list");
            std::vector<int> idx = target.indices;
            std::sort(idx.begin(), idx.end());
            if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
                fail(ErrorKind::InvalidInput, "fcm backend: duplicate target cluster index");
            for (int j : idx)
                if (j < 0 || j >= c)
                    fail(ErrorKind::InvalidInput, "fcm backend: target cluster index " +
                                                      std::to_string(j) + " out of range [0," +
                                                      std::to_string(c - 1) + "]");
            return idx;
        }
        case FcmTarget::Rule::NearestIntensity: {
            const double z = (target.raw_intensity - norm.mean) / norm.stddev;
            int best = 0;
            for (int j = 1; j < c; ++j)
                if (std::abs(model.centroids[j] - z) < std::abs(model.centroids[best] - z))
                    best = j;
            return {best};
        }
    }
    fail(ErrorKind::InvalidInput, "fcm backend: unknown target rule");
}

std::unique_ptr<PatchBackend> make_import_backend(const std::string& path,
                                                  const Dims& expected_dims) {
    Volume3D probs = io::load_portable_volume(path);
    if (probs.dims != expected_dims)
        fail(ErrorKind::InvalidInput,
             "import backend: probability volume dims " + dims_to_string(probs.dims) +
                 " do not match volume dims " + dims_to_string(expected_dims));
    bool warned = false;
    for (double& p : probs.voxels) {
        if (p < -1e-3 || p > 1.0 + 1e-3)
            fail(ErrorKind::InvalidInput,
                 "import backend: probability " + std::to_string(p) + " outside [0,1] in " + path);
        if (p < 0.0 || p > 1.0) {
            if (!warned) {
                std::cerr << "warning: clamping out-of-range probabilities (<= 1e-3) in " << path
                          << "\n";
                warned = true;
            }
            p = std::clamp(p, 0.0, 1.0);
        }
    }
    return std::make_unique<VolumeLookupBackend>("import", probs.dims, std::move(probs.voxels));
}

}  // namespace

std::unique_ptr<PatchBackend> make_backend(const BackendSpec& spec, const Volume3D& normalized,
                                           const NormStats& norm,
                                           const BinaryMask3D* breast_mask) {
    switch (spec.kind) {
        case BackendKind::Fcm: {
            const FcmOptions& o = spec.fcm;
            std::vector<double> sample;
            if (o.fit_domain == FcmOptions::FitDomain::BreastMask) {
                if (breast_mask == nullptr)
                    fail(ErrorKind::InvalidInput,
                         "fcm backend: the breast-mask fit domain is only available for the "
                         "dense stage, after a breast mask exists");
                if (breast_mask->dims != normalized.dims)
                    fail(ErrorKind::InvalidInput,
                         "fcm backend: breast mask dims " + dims_to_string(breast_mask->dims) +
                             " do not match volume dims " + dims_to_string(normalized.dims));
                std::vector<double> inside;
                for (std::size_t i = 0; i < breast_mask->voxels.size(); ++i)
                    if (breast_mask->voxels[i]) inside.push_back(normalized.voxels[i]);
                if (inside.empty())
                    fail(ErrorKind::Computation,
                         "fcm backend: breast mask is empty; cannot fit the dense model "
                         "within it");
                sample = strided_subsample(inside, o.max_fit_samples);
            } else {
                sample = strided_subsample(normalized.voxels, o.max_fit_samples);
            }
            FcmModel model = fcm_fit(sample, o.clusters, o.fuzziness, o.tol, o.max_iter);
            auto targets = resolve_targets(o.target, model, norm);
            return std::make_unique<FcmBackend>(std::move(model), std::move(targets));
        }
        case BackendKind::Oracle: {
            BinaryMask3D mask = spec.oracle_mask;
            if (mask.voxels.empty()) {
                if (spec.oracle_path.empty())
                    fail(ErrorKind::InvalidInput, "oracle backend: no mask provided");
                mask = io::load_mask(spec.oracle_path);
            }
            validate_mask(mask, "oracle backend");
            if (mask.dims != normalized.dims)
                fail(ErrorKind::InvalidInput,
                     "oracle backend: mask dims " + dims_to_string(mask.dims) +
                         " do not match volume dims " + dims_to_string(normalized.dims));
            std::vector<double> values(mask.voxels.begin(), mask.voxels.end());
            return std::make_unique<VolumeLookupBackend>("oracle", mask.dims, std::move(values));
        }
        case BackendKind::Import:
            return make_import_backend(spec.import_path, normalized.dims);
    }
    fail(ErrorKind::InvalidInput, "make_backend: unknown backend kind");
}

SegmentationResult segment_subject(const Volume3D& v, const BackendSpec& breast,
                                   const BackendSpec& dense, const SegmentConfig& cfg) {
    SegmentationResult result;
    Volume3D normalized = zscore_normalize(v, &result.norm);
    result.plan = plan_patches(normalized.dims, cfg.patch_size, cfg.steps);

    auto breast_backend = make_backend(breast, normalized, result.norm);
    result.breast_backend = breast_backend->name();
    ProbabilityVolume pb = run_sliding_window(normalized, *breast_backend, result.plan,
                                              cfg.max_threads);
    result.breast = binarize(pb, cfg.threshold);

    auto dense_backend = make_backend(dense, normalized, result.norm, &result.breast);
    result.dense_backend = dense_backend->name();
    ProbabilityVolume pd = run_sliding_window(normalized, *dense_backend, result.plan,
                                              cfg.max_threads);
    result.dense = binarize(pd, cfg.threshold);

    // Dense tissue outside the breast makes the density ratio ill-posed.
    for (std::size_t i = 0; i < result.dense.voxels.size(); ++i)
        result.dense.voxels[i] = result.dense.voxels[i] & result.breast.voxels[i];
    return result;
}

LateralitySplit split_laterality(const BinaryMask3D& mask) {
    validate_mask(mask, "split_laterality");
    LateralitySplit s;
    s.left.dims = mask.dims;
    s.left.voxels.assign(mask.voxels.size(), 0);
    s.right.dims = mask.dims;
    s.right.voxels.assign(mask.voxels.size(), 0);
    const int split = mask.dims[0] / 2;
    std::size_t i = 0;
    for (int z = 0; z < mask.dims[2]; ++z)
        for (int y = 0; y < mask.dims[1]; ++y)
            for (int x = 0; x < mask.dims[0]; ++x, ++i) {
                // LPS: +x is patient left.
                if (x >= split)
                    s.left.voxels[i] = mask.voxels[i];
                else
                    s.right.voxels[i] = mask.voxels[i];
            }
    return s;
}

}  // namespace mrd::seg
