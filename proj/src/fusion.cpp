#include "mrd/fusion.hpp"

#include <cstdlib>
#include <future>
#include <thread>

namespace mrd::seg {

int resolve_thread_cap(int requested) {
    if (requested >= 1) return requested;
    if (const char* env = std::getenv("MRDENSITY_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<int>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw >= 1 ? static_cast<int>(hw) : 1;
}

namespace {

void extract_patch(const std::vector<double>& padded, const Dims& pd,
                   const std::array<int, 3>& origin, int P, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(P) * P * P);
    std::size_t w = 0;
    for (int z = 0; z < P; ++z)
        for (int y = 0; y < P; ++y) {
            const double* src =
                padded.data() + flat_index(pd, origin[0], origin[1] + y, origin[2] + z);
            for (int x = 0; x < P; ++x) out[w++] = src[x];
        }
}

void check_prediction(std::vector<double>& pred, const std::string& backend_name) {
    // Memberships and subset sums can overshoot [0,1] by float noise; a
    // genuine out-of-range value is a backend contract violation.
    constexpr double slack = 1e-9;
    for (double& p : pred) {
        if (!(p >= -slack && p <= 1.0 + slack))
            fail(ErrorKind::Backend, "backend `" + backend_name +
                                         "` returned out-of-range probability " +
                                         std::to_string(p));
        if (p < 0.0) p = 0.0;
        if (p > 1.0) p = 1.0;
    }
}

}  // namespace

ProbabilityVolume run_sliding_window(const Volume3D& v, const PatchBackend& backend,
                                     const PatchPlan& plan, int max_threads) {
    validate_volume(v, "run_sliding_window");
    if (v.dims != plan.dims)
        fail(ErrorKind::InvalidInput,
             "run_sliding_window: plan was built for dims " + dims_to_string(plan.dims) +
                 " but volume has " + dims_to_string(v.dims));
    if (plan.origins.empty())
        fail(ErrorKind::InvalidInput, "run_sliding_window: empty patch plan");

    const int P = plan.patch_size;
    const Dims pd = plan.padded_dims;
    const std::int64_t n_padded = voxel_count(pd);

    // Zero-padding value 0 equals the post-normalization mean.
    std::vector<double> padded;
    const std::vector<double>* src = &v.voxels;
    if (plan.needs_padding()) {
        padded.assign(static_cast<std::size_t>(n_padded), 0.0);
        for (int z = 0; z < v.dims[2]; ++z)
            for (int y = 0; y < v.dims[1]; ++y) {
                const double* in = v.voxels.data() + flat_index(v.dims, 0, y, z);
                double* out = padded.data() + flat_index(pd, 0, y, z);
                for (int x = 0; x < v.dims[0]; ++x) out[x] = in[x];
            }
        src = &padded;
    }

    std::vector<double> sum(static_cast<std::size_t>(n_padded), 0.0);
    std::vector<std::int32_t> cover(static_cast<std::size_t>(n_padded), 0);

    const std::size_t patch_len = static_cast<std::size_t>(P) * P * P;
    auto predict_one = [&](const std::array<int, 3>& origin, std::vector<double>& in_buf,
                           std::vector<double>& out_buf) {
        extract_patch(*src, pd, origin, P, in_buf);
        out_buf.resize(patch_len);
        backend.predict(PatchInput{std::span<const double>(in_buf), origin, P},
                        std::span<double>(out_buf));
        check_prediction(out_buf, backend.name());
    };

    auto accumulate = [&](const std::array<int, 3>& origin, const std::vector<double>& pred) {
        std::size_t r = 0;
        for (int z = 0; z < P; ++z)
            for (int y = 0; y < P; ++y) {
                const std::int64_t base =
                    flat_index(pd, origin[0], origin[1] + y, origin[2] + z);
                for (int x = 0; x < P; ++x, ++r) {
                    sum[static_cast<std::size_t>(base + x)] += pred[r];
                    ++cover[static_cast<std::size_t>(base + x)];
                }
            }
    };

    const int threads = resolve_thread_cap(max_threads);
    if (threads <= 1 || plan.origins.size() == 1) {
        std::vector<double> in_buf, out_buf;
        for (const auto& origin : plan.origins) {
            predict_one(origin, in_buf, out_buf);
            accumulate(origin, out_buf);
        }
    } else {
        // Predict a block of patches concurrently, then reduce the block in
        // plan order; fused values stay independent of the thread count.
        const std::size_t block = static_cast<std::size_t>(threads);
        std::vector<std::vector<double>> preds(block);
        for (std::size_t begin = 0; begin < plan.origins.size(); begin += block) {
            const std::size_t end = std::min(begin + block, plan.origins.size());
            std::vector<std::future<void>> jobs;
            for (std::size_t i = begin; i < end; ++i) {
                jobs.push_back(std::async(std::launch::async, [&, i] {
                    std::vector<double> in_buf;
                    predict_one(plan.origins[i], in_buf, preds[i - begin]);
                }));
            }
            for (auto& j : jobs) j.get();
            for (std::size_t i = begin; i < end; ++i)
                accumulate(plan.origins[i], preds[i - begin]);
        }
    }

    ProbabilityVolume out;
    out.dims = v.dims;
    out.probs.resize(v.voxels.size());
    out.coverage.resize(v.voxels.size());
    for (int z = 0; z < v.dims[2]; ++z)
        for (int y = 0; y < v.dims[1]; ++y) {
            const std::int64_t src_base = flat_index(pd, 0, y, z);
            const std::int64_t dst_base = flat_index(v.dims, 0, y, z);
            for (int x = 0; x < v.dims[0]; ++x) {
                const auto si = static_cast<std::size_t>(src_base + x);
                const auto di = static_cast<std::size_t>(dst_base + x);
                if (cover[si] < 1)
                    fail(ErrorKind::Computation,
                         "run_sliding_window: voxel (" + std::to_string(x) + "," +
                             std::to_string(y) + "," + std::to_string(z) +
                             ") not covered by any patch (plan does not cover the volume)");
                out.probs[di] = sum[si] / cover[si];
                out.coverage[di] = cover[si];
            }
        }
    return out;
}

BinaryMask3D binarize(const ProbabilityVolume& p, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        fail(ErrorKind::InvalidInput,
             "binarize: threshold must lie in (0,1), got " + std::to_string(threshold));
    BinaryMask3D m;
    m.dims = p.dims;
    m.voxels.resize(p.probs.size());
    for (std::size_t i = 0; i < p.probs.size(); ++i)
        m.voxels[i] = p.probs[i] >= threshold ? 1 : 0;
    return m;
}

}  // namespace mrd::seg
