// mrdensity: breast MRI density quantification pipeline.
//
// Subcommands wire volume ingestion, sliding-window segmentation, density
// quantification and cohort analytics together over portable on-disk
// volumes and RFC-4180 CSV files. Exit codes: 0 success, 2 input/config
// error, 3 backend/computation error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mrd/backend.hpp"
#include "mrd/cohort.hpp"
#include "mrd/cohort_csv.hpp"
#include "mrd/core.hpp"
#include "mrd/correlation.hpp"
#include "mrd/csv.hpp"
#include "mrd/density.hpp"
#include "mrd/dicom.hpp"
#include "mrd/fusion.hpp"
#include "mrd/keyvalue.hpp"
#include "mrd/metrics.hpp"
#include "mrd/normalize.hpp"
#include "mrd/phantom.hpp"
#include "mrd/portable.hpp"
#include "mrd/reports.hpp"

namespace fs = std::filesystem;
using mrd::ErrorKind;
using mrd::fail;

namespace {

std::string fmt_fixed(double v, int places) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, v);
    return buf;
}

std::string fmt_sig(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Shared option parsing

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

std::array<int, 3> parse_triplet(const std::string& s, const std::string& what) {
    auto parts = split(s, ',');
    if (parts.size() != 3)
        fail(ErrorKind::InvalidInput, what + ": expected three comma-separated values, got `" +
                                          s + "`");
    std::array<int, 3> out{};
    for (int k = 0; k < 3; ++k) {
        try {
            std::size_t used = 0;
            out[k] = std::stoi(parts[k], &used);
            if (used != parts[k].size()) throw std::invalid_argument(parts[k]);
        } catch (const std::exception&) {
            fail(ErrorKind::InvalidInput, what + ": cannot parse `" + parts[k] + "` as integer");
        }
    }
    return out;
}

/// Backend spec grammar:
///   fcm[:opt,opt,...]  opts: k=<clusters>, m=<fuzziness>, tol=<tol>,
///                            iters=<max>, targets=<i+j+...>, nearest=<raw>,
///                            fit=<volume|breast>
///   oracle:<mask.mhdr>
///   import:<probs.mhdr>
mrd::seg::BackendSpec parse_backend(const std::string& text, const std::string& flag) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (kind == "oracle") {
        if (rest.empty()) fail(ErrorKind::InvalidInput, flag + ": oracle backend needs a path");
        return mrd::seg::BackendSpec::make_oracle_path(rest);
    }
    if (kind == "import") {
        if (rest.empty()) fail(ErrorKind::InvalidInput, flag + ": import backend needs a path");
        return mrd::seg::BackendSpec::make_import(rest);
    }
    if (kind != "fcm")
        fail(ErrorKind::InvalidInput,
             flag + ": unknown backend `" + kind + "` (expected fcm, oracle or import)");

    mrd::seg::FcmOptions opts;
    if (!rest.empty()) {
        for (const auto& item : split(rest, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                fail(ErrorKind::InvalidInput, flag + ": malformed fcm option `" + item + "`");
            const std::string key = item.substr(0, eq);
            const std::string value = item.substr(eq + 1);
            try {
                if (key == "k") {
                    opts.clusters = std::stoi(value);
                } else if (key == "m") {
                    opts.fuzziness = std::stod(value);
                } else if (key == "tol") {
                    opts.tol = std::stod(value);
                } else if (key == "iters") {
                    opts.max_iter = std::stoi(value);
                } else if (key == "targets") {
                    opts.target.rule = mrd::seg::FcmTarget::Rule::Indices;
                    opts.target.indices.clear();
                    for (const auto& idx : split(value, '+'))
                        opts.target.indices.push_back(std::stoi(idx));
                } else if (key == "nearest") {
                    opts.target.rule = mrd::seg::FcmTarget::Rule::NearestIntensity;
                    opts.target.raw_intensity = std::stod(value);
                } else if (key == "fit") {
                    using FitDomain = mrd::seg::FcmOptions::FitDomain;
                    if (value == "volume")
                        opts.fit_domain = FitDomain::WholeVolume;
                    else if (value == "breast")
                        opts.fit_domain = FitDomain::BreastMask;
                    else
                        fail(ErrorKind::InvalidInput,
                             flag + ": fit must be `volume` or `breast`, got `" + value + "`");
                } else {
                    fail(ErrorKind::InvalidInput, flag + ": unknown fcm option `" + key + "`");
                }
            } catch (const mrd::Error&) {
                throw;
            } catch (const std::exception&) {
                fail(ErrorKind::InvalidInput,
                     flag + ": cannot parse fcm option value `" + item + "`");
            }
        }
    }
    return mrd::seg::BackendSpec::make_fcm(opts);
}

/// --laterality whole|left|right|contralateral:left|contralateral:right.
/// Contralateral quantifies the breast opposite the given tumor side.
std::optional<mrd::quant::Side> parse_laterality(const std::string& text) {
    if (text == "whole") return std::nullopt;
    if (text == "left") return mrd::quant::Side::Left;
    if (text == "right") return mrd::quant::Side::Right;
    if (text == "contralateral:left") return mrd::quant::Side::Right;
    if (text == "contralateral:right") return mrd::quant::Side::Left;
    fail(ErrorKind::InvalidInput,
         "--laterality: expected whole, left, right, contralateral:left or "
         "contralateral:right, got `" +
             text + "`");
}

mrd::BinaryMask3D select_side(const mrd::BinaryMask3D& mask, mrd::quant::Side side) {
    auto sp = mrd::seg::split_laterality(mask);
    return side == mrd::quant::Side::Left ? std::move(sp.left) : std::move(sp.right);
}

void require_exists(const std::string& path, const std::string& what) {
    if (!fs::exists(path))
        fail(ErrorKind::Io, what + " does not exist: " + path);
}

/// Config files for the segment and cohort subcommands. The bundled CLI11
/// release only applies set_config files on the root command during a
/// nested parse, so these are handled explicitly: `key = value` lines named
/// after the long options, command-line values taking precedence, unknown
/// keys rejected.
class ConfigOverrides {
public:
    ConfigOverrides(const CLI::App* cmd, const std::string& path)
        : cmd_(cmd), kv_(mrd::kv::KeyValueFile::parse_file(path)) {}

    void apply_int(const std::string& key, int& out) {
        if (take(key)) out = static_cast<int>(kv_.get_int(key));
    }
    void apply_double(const std::string& key, double& out) {
        if (take(key)) out = kv_.get_double(key);
    }
    void apply_string(const std::string& key, std::string& out) {
        if (take(key)) out = kv_.get(key);
    }

    /// Call after the last apply_* so typos never pass silently.
    void finish() const {
        for (const auto& [key, value] : kv_.entries())
            if (!allowed_.count(key))
                fail(ErrorKind::InvalidInput,
                     kv_.origin() + ": unknown config key `" + key + "`");
    }

private:
    bool take(const std::string& key) {
        allowed_.insert(key);
        return kv_.has(key) && cmd_->count("--" + key) == 0;
    }

    const CLI::App* cmd_;
    mrd::kv::KeyValueFile kv_;
    std::set<std::string> allowed_;
};

fs::path ensure_header_ext(fs::path p) {
    if (p.extension() != ".mhdr") p += ".mhdr";
    return p;
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Io, "cannot create output directory " + dir + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
    std::string input;
    std::string format = "auto";
    std::string out;
};

int cmd_ingest(const IngestArgs& a) {
    require_exists(a.input, "input path");
    std::string format = a.format;
    if (format == "auto") format = fs::is_directory(a.input) ? "dicom" : "portable";

    mrd::Volume3D volume;
    if (format == "dicom") {
        auto [vol, meta] = mrd::io::load_dicom_series(a.input);
        volume = std::move(vol);
        std::cout << "slices " << meta.slice_positions.size() << "\n";
    } else {
        volume = mrd::io::load_portable_volume(a.input);
    }
    const fs::path out = ensure_header_ext(a.out);
    if (out.has_parent_path()) ensure_out_dir(out.parent_path().string());
    mrd::io::save_portable_volume(volume, out);
    std::cout << "dims " << mrd::dims_to_string(volume.dims) << "\n"
              << "spacing_mm " << mrd::stats::format_double(volume.spacing[0]) << " "
              << mrd::stats::format_double(volume.spacing[1]) << " "
              << mrd::stats::format_double(volume.spacing[2]) << "\n"
              << "wrote " << out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// segment

struct SegmentArgs {
    std::string input;
    std::string out_dir;
    std::string subject;
    std::string config;
    int patch_size = 96;
    std::string steps = "8,8,3";
    double threshold = 0.5;
    std::string breast_backend = "fcm";
    std::string dense_backend = "fcm:targets=1";
    int threads = 0;
};

void apply_shared_segment_config(ConfigOverrides& cfg, SegmentArgs& s) {
    cfg.apply_int("patch-size", s.patch_size);
    cfg.apply_string("steps", s.steps);
    cfg.apply_double("threshold", s.threshold);
    cfg.apply_string("breast-backend", s.breast_backend);
    cfg.apply_string("dense-backend", s.dense_backend);
}

/// Substitutes {subject} in oracle/import backend paths so one config line
/// can serve every subject of a manifest.
std::string expand_subject(std::string text, const std::string& subject) {
    const std::string placeholder = "{subject}";
    for (auto pos = text.find(placeholder); pos != std::string::npos;
         pos = text.find(placeholder, pos))
        text.replace(pos, placeholder.size(), subject);
    return text;
}

struct SegmentOutcome {
    mrd::seg::SegmentationResult result;
    std::int64_t breast_voxels = 0;
    std::int64_t dense_voxels = 0;
};

SegmentOutcome run_segmentation(const mrd::Volume3D& volume, const SegmentArgs& a,
                                const std::string& subject) {
    if (!(a.threshold > 0.0 && a.threshold < 1.0))
        fail(ErrorKind::InvalidInput, "--threshold: value " + fmt_sig(a.threshold) +
                                          " outside (0,1)");
    if (a.patch_size < 1) fail(ErrorKind::InvalidInput, "--patch-size: must be >= 1");

    mrd::seg::SegmentConfig cfg;
    cfg.patch_size = a.patch_size;
    cfg.steps = parse_triplet(a.steps, "--steps");
    cfg.threshold = a.threshold;
    cfg.max_threads = a.threads;

    const auto breast = parse_backend(expand_subject(a.breast_backend, subject),
                                      "--breast-backend");
    const auto dense = parse_backend(expand_subject(a.dense_backend, subject),
                                     "--dense-backend");

    SegmentOutcome out;
    out.result = mrd::seg::segment_subject(volume, breast, dense, cfg);
    out.breast_voxels = out.result.breast.count();
    out.dense_voxels = out.result.dense.count();
    return out;
}

void write_segmentation(const SegmentOutcome& seg, const SegmentArgs& a,
                        const std::string& subject, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    const fs::path dir(out_dir);
    mrd::io::save_mask(seg.result.breast, dir / "breast_mask.mhdr");
    mrd::io::save_mask(seg.result.dense, dir / "dense_mask.mhdr");

    const auto& plan = seg.result.plan;
    mrd::kv::write_file(
        dir / "run_record.txt",
        {{"subject", subject},
         {"input", a.input},
         {"patch_size", std::to_string(plan.patch_size)},
         {"steps", std::to_string(plan.steps[0]) + " " + std::to_string(plan.steps[1]) + " " +
                       std::to_string(plan.steps[2])},
         {"threshold", mrd::stats::format_double(a.threshold)},
         {"breast_backend", seg.result.breast_backend},
         {"dense_backend", seg.result.dense_backend},
         {"patches", std::to_string(plan.origins.size())},
         {"dims", mrd::dims_to_string(plan.dims)},
         {"padded_dims", mrd::dims_to_string(plan.padded_dims)},
         {"norm_mean", mrd::stats::format_double(seg.result.norm.mean)},
         {"norm_stddev", mrd::stats::format_double(seg.result.norm.stddev)},
         {"breast_voxels", std::to_string(seg.breast_voxels)},
         {"dense_voxels", std::to_string(seg.dense_voxels)}});
}

int cmd_segment(const SegmentArgs& a) {
    require_exists(a.input, "input volume");
    const std::string subject =
        a.subject.empty() ? fs::path(a.input).stem().string() : a.subject;
    const mrd::Volume3D volume = mrd::io::load_portable_volume(a.input);
    const SegmentOutcome seg = run_segmentation(volume, a, subject);
    write_segmentation(seg, a, subject, a.out_dir);
    std::cout << "subject " << subject << "\n"
              << "patches " << seg.result.plan.origins.size() << "\n"
              << "breast_voxels " << seg.breast_voxels << "\n"
              << "dense_voxels " << seg.dense_voxels << "\n"
              << "wrote " << (fs::path(a.out_dir) / "breast_mask.mhdr").string() << " "
              << (fs::path(a.out_dir) / "dense_mask.mhdr").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// quantify

struct QuantifyArgs {
    std::string breast;
    std::string dense;
    std::string subject = "subject";
    std::string laterality = "whole";
    std::string profile_axis;  // empty = no profile
    std::string out_csv;
    std::string out_profile;
};

mrd::quant::Axis parse_axis(const std::string& s) {
    if (s == "x") return mrd::quant::Axis::X;
    if (s == "y") return mrd::quant::Axis::Y;
    if (s == "z") return mrd::quant::Axis::Z;
    fail(ErrorKind::InvalidInput, "--profile: axis must be x, y or z, got `" + s + "`");
}

mrd::csv::Table profile_table(const mrd::quant::SliceProfile& profile) {
    mrd::csv::Table t;
    t.header = {"axis", "slice_index", "breast_voxels", "dense_voxels", "density"};
    for (const auto& s : profile.per_slice)
        t.rows.push_back({mrd::quant::axis_name(profile.axis), std::to_string(s.index),
                          std::to_string(s.breast_voxels), std::to_string(s.dense_voxels),
                          s.empty ? "NA" : fmt_fixed(s.density, 6)});
    return t;
}

int cmd_quantify(const QuantifyArgs& a) {
    require_exists(a.breast, "breast mask");
    require_exists(a.dense, "dense mask");
    mrd::BinaryMask3D breast = mrd::io::load_mask(a.breast);
    mrd::BinaryMask3D dense = mrd::io::load_mask(a.dense);

    const auto side = parse_laterality(a.laterality);
    mrd::quant::Side record_side = mrd::quant::Side::Whole;
    if (side) {
        record_side = *side;
        breast = select_side(breast, *side);
        dense = select_side(dense, *side);
    }

    auto record = mrd::quant::compute_density(dense, breast);
    record.subject_id = a.subject;
    record.side = record_side;

    std::cout << "subject " << record.subject_id << "\n"
              << "side " << mrd::quant::side_name(record.side) << "\n"
              << "density " << fmt_fixed(record.density, 6) << "\n"
              << "dense_voxels " << record.dense_voxels << "\n"
              << "breast_voxels " << record.breast_voxels << "\n";

    if (!a.out_csv.empty()) {
        mrd::csv::Table t;
        t.header = {"subject_id", "side", "density", "dense_voxels", "breast_voxels"};
        t.rows.push_back({record.subject_id, mrd::quant::side_name(record.side),
                          fmt_fixed(record.density, 6), std::to_string(record.dense_voxels),
                          std::to_string(record.breast_voxels)});
        mrd::csv::write_file(a.out_csv, t);
    }

    if (!a.profile_axis.empty()) {
        const auto axis = parse_axis(a.profile_axis);
        const auto profile = mrd::quant::slice_density_profile(dense, breast, axis);
        const auto table = profile_table(profile);
        if (a.out_profile.empty()) {
            std::cout << mrd::csv::format_row(table.header);
            for (const auto& row : table.rows) std::cout << mrd::csv::format_row(row);
        } else {
            mrd::csv::write_file(a.out_profile, table);
        }
    } else if (!a.out_profile.empty()) {
        fail(ErrorKind::InvalidInput, "--out-profile requires --profile");
    }
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string test;
    std::string reference;
    std::string spacing;  // optional "sx,sy,sz"
};

int cmd_evaluate(const EvaluateArgs& a) {
    require_exists(a.test, "test mask");
    require_exists(a.reference, "reference mask");
    const auto test = mrd::io::load_mask(a.test);
    const auto reference = mrd::io::load_mask(a.reference);

    mrd::Spacing spacing{1.0, 1.0, 1.0};
    if (!a.spacing.empty()) {
        auto parts = split(a.spacing, ',');
        if (parts.size() != 3)
            fail(ErrorKind::InvalidInput, "--spacing: expected sx,sy,sz");
        for (int k = 0; k < 3; ++k)
            spacing[k] = mrd::stats::parse_double(parts[k], "--spacing");
    }

    const auto metrics = mrd::quant::compare_masks(test, reference, spacing);
    std::cout << "DSC " << fmt_fixed(100.0 * metrics.dsc, 2) << "  HD "
              << fmt_fixed(metrics.hd, 2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// phantom

struct PhantomArgs {
    std::string spec_file;
    std::string out;
    std::optional<std::string> dims;
    std::optional<double> noise_sigma;
    std::optional<std::uint64_t> seed;
};

mrd::io::PhantomSpec load_phantom_spec(const std::string& path) {
    auto kv = mrd::kv::KeyValueFile::parse_file(path);
    mrd::io::PhantomSpec spec;
    auto triple = [&](const std::string& key, std::array<double, 3>& out) {
        if (!kv.has(key)) return;
        auto v = kv.get_doubles(key, 3);
        std::copy(v.begin(), v.end(), out.begin());
    };
    if (kv.has("dims")) {
        auto d = kv.get_ints("dims", 3);
        for (int k = 0; k < 3; ++k) spec.dims[k] = static_cast<int>(d[k]);
    }
    triple("breast_center", spec.breast_center);
    triple("breast_semiaxes", spec.breast_semiaxes);
    triple("dense_center", spec.dense_center);
    triple("dense_semiaxes", spec.dense_semiaxes);
    if (kv.has("intensity_fat")) spec.intensity_fat = kv.get_double("intensity_fat");
    if (kv.has("intensity_dense")) spec.intensity_dense = kv.get_double("intensity_dense");
    if (kv.has("intensity_background"))
        spec.intensity_background = kv.get_double("intensity_background");
    if (kv.has("noise_sigma")) spec.noise_sigma = kv.get_double("noise_sigma");
    if (kv.has("seed")) spec.seed = static_cast<std::uint64_t>(kv.get_int("seed"));
    return spec;
}

int cmd_phantom(const PhantomArgs& a) {
    mrd::io::PhantomSpec spec;
    if (!a.spec_file.empty()) {
        require_exists(a.spec_file, "phantom spec");
        spec = load_phantom_spec(a.spec_file);
    }
    if (a.dims) {
        auto d = parse_triplet(*a.dims, "--dims");
        spec.dims = {d[0], d[1], d[2]};
    }
    if (a.noise_sigma) spec.noise_sigma = *a.noise_sigma;
    if (a.seed) spec.seed = *a.seed;

    const auto phantom = mrd::io::generate_phantom(spec);
    const fs::path out = ensure_header_ext(a.out);
    if (out.has_parent_path()) ensure_out_dir(out.parent_path().string());
    const std::string stem = out.parent_path().empty()
                                 ? out.stem().string()
                                 : (out.parent_path() / out.stem()).string();
    mrd::io::save_portable_volume(phantom.volume, out);
    mrd::io::save_mask(phantom.breast_truth, stem + "_breast.mhdr");
    mrd::io::save_mask(phantom.dense_truth, stem + "_dense.mhdr");

    const auto breast_voxels = phantom.breast_truth.count();
    const auto dense_voxels = phantom.dense_truth.count();
    std::cout << "analytic_dense_fraction "
              << fmt_fixed(mrd::io::analytic_dense_fraction(spec), 6) << "\n"
              << "voxel_dense_fraction "
              << fmt_fixed(static_cast<double>(dense_voxels) /
                               static_cast<double>(breast_voxels),
                           6)
              << "\n"
              << "breast_voxels " << breast_voxels << "\n"
              << "dense_voxels " << dense_voxels << "\n"
              << "wrote " << out.string() << " " << stem << "_breast.mhdr " << stem
              << "_dense.mhdr\n";
    return 0;
}

// ---------------------------------------------------------------------------
// parse-reports

struct ParseReportsArgs {
    std::string input;
    std::string out_dir;
};

std::vector<std::pair<std::string, std::string>> load_report_corpus(const std::string& input) {
    std::vector<std::pair<std::string, std::string>> reports;
    if (fs::is_directory(input)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(input))
            if (entry.is_regular_file() && entry.path().extension() == ".txt")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            std::ifstream in(f, std::ios::binary);
            if (!in) fail(ErrorKind::Io, "cannot read report file " + f.string());
            std::ostringstream text;
            text << in.rdbuf();
            reports.emplace_back(f.stem().string(), text.str());
        }
        if (reports.empty())
            fail(ErrorKind::InvalidInput, "no .txt reports found in " + input);
    } else {
        const auto table = mrd::csv::parse_file(input);
        const std::vector<std::string> expected = {"subject_id", "report_text"};
        if (table.header != expected)
            fail(ErrorKind::InvalidInput,
                 input + ": report csv header must be `subject_id,report_text`");
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            if (table.rows[i].size() != 2)
                fail(ErrorKind::InvalidInput, input + ": row " + std::to_string(i + 2) +
                                                  " must have 2 fields");
            reports.emplace_back(table.rows[i][0], table.rows[i][1]);
        }
        if (reports.empty()) fail(ErrorKind::InvalidInput, input + ": no report rows");
    }
    return reports;
}

int cmd_parse_reports(const ParseReportsArgs& a) {
    require_exists(a.input, "report corpus");
    const auto reports = load_report_corpus(a.input);
    ensure_out_dir(a.out_dir);

    mrd::csv::Table categories;
    categories.header = {"subject_id", "category"};
    mrd::csv::Table exceptions;
    exceptions.header = {"subject_id", "reason"};

    for (const auto& [subject, text] : reports) {
        try {
            const auto category = mrd::stats::parse_density_category(text);
            categories.rows.push_back({subject, mrd::stats::category_token(category)});
        } catch (const mrd::Error& e) {
            exceptions.rows.push_back({subject, e.what()});
        }
    }

    const fs::path dir(a.out_dir);
    mrd::csv::write_file((dir / "categories.csv").string(), categories);
    mrd::csv::write_file((dir / "exceptions.csv").string(), exceptions);
    std::cout << "reports " << reports.size() << "\n"
              << "categorized " << categories.rows.size() << "\n"
              << "exceptions " << exceptions.rows.size() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// cohort (cohort CSV mode and manifest batch mode)

struct CohortArgs {
    std::string input;
    std::string out_dir;
    std::string config;
    double bin_width = 0.02;
    std::string laterality = "whole";
    SegmentArgs seg;  // segmentation settings for manifest mode
    int threads = 0;
};

void write_cohort_tables(const std::vector<mrd::stats::CohortRecord>& records,
                         const CohortArgs& a) {
    ensure_out_dir(a.out_dir);
    const fs::path dir(a.out_dir);

    std::vector<double> densities;
    densities.reserve(records.size());
    for (const auto& r : records) densities.push_back(r.density);

    const auto groups = mrd::stats::cohort_summary(records);
    mrd::csv::Table summary;
    summary.header = {"dataset", "n", "mean", "stddev"};
    for (const auto& g : groups)
        summary.rows.push_back({g.dataset, std::to_string(g.n),
                                mrd::stats::format_double(g.mean),
                                mrd::stats::format_double(g.stddev)});
    const auto all = mrd::stats::summarize(densities);
    summary.rows.push_back({"all", std::to_string(all.n), mrd::stats::format_double(all.mean),
                            mrd::stats::format_double(all.stddev)});
    mrd::csv::write_file((dir / "summary.csv").string(), summary);

    const auto hist = mrd::stats::density_histogram(densities, a.bin_width);
    mrd::csv::Table hist_table;
    hist_table.header = {"bin_start", "bin_end", "count"};
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        hist_table.rows.push_back({mrd::stats::format_double(hist.edges[i]),
                                   mrd::stats::format_double(hist.edges[i + 1]),
                                   std::to_string(hist.counts[i])});
    mrd::csv::write_file((dir / "histogram.csv").string(), hist_table);

    const auto ages = mrd::stats::age_group_stats(records);
    mrd::csv::Table age_table;
    age_table.header = {"bin", "n", "mean", "stddev", "q1", "median", "q3"};
    for (const auto& bin : ages.bins)
        age_table.rows.push_back({std::to_string(bin.low) + "-" + std::to_string(bin.high),
                                  std::to_string(bin.stats.n),
                                  mrd::stats::format_double(bin.stats.mean),
                                  mrd::stats::format_double(bin.stats.stddev),
                                  mrd::stats::format_double(bin.stats.q1),
                                  mrd::stats::format_double(bin.stats.median),
                                  mrd::stats::format_double(bin.stats.q3)});
    mrd::csv::write_file((dir / "age_bins.csv").string(), age_table);

    std::cout << "records " << records.size() << "\n"
              << "datasets " << groups.size() << "\n"
              << "mean " << mrd::stats::format_double(all.mean) << "\n"
              << "stddev " << mrd::stats::format_double(all.stddev) << "\n";
    if (ages.excluded > 0)
        std::cout << "warning: " << ages.excluded
                  << " records excluded from age bins (missing or outside 20-89)\n";
}

struct ManifestEntry {
    std::string subject_id;
    std::string input;
    std::string kind;
    std::optional<double> age;
    std::string report;
    std::string dataset;
};

std::vector<ManifestEntry> load_manifest(const std::string& path, const mrd::csv::Table* pre) {
    const auto table = pre ? *pre : mrd::csv::parse_file(path);
    std::vector<ManifestEntry> entries;
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        if (p.empty() || fs::path(p).is_absolute()) return p;
        return (base / p).string();
    };
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::string where = "manifest row " + std::to_string(i + 2);
        if (row.size() != 6)
            fail(ErrorKind::InvalidInput, where + ": expected 6 fields, got " +
                                              std::to_string(row.size()));
        ManifestEntry e;
        e.subject_id = row[0];
        if (e.subject_id.empty()) fail(ErrorKind::InvalidInput, where + ": empty subject_id");
        e.input = resolve(row[1]);
        e.kind = row[2];
        if (e.kind != "dicom_dir" && e.kind != "portable")
            fail(ErrorKind::InvalidInput,
                 where + ": kind must be dicom_dir or portable, got `" + e.kind + "`");
        if (!row[3].empty()) e.age = mrd::stats::parse_double(row[3], where + " age");
        e.report = resolve(row[4]);
        e.dataset = row[5];
        entries.push_back(std::move(e));
    }
    if (entries.empty()) fail(ErrorKind::InvalidInput, path + ": empty manifest");

    // Fail fast before the batch starts: unique ids, every path present.
    for (std::size_t i = 0; i < entries.size(); ++i)
        for (std::size_t j = i + 1; j < entries.size(); ++j)
            if (entries[i].subject_id == entries[j].subject_id)
                fail(ErrorKind::InvalidInput,
                     "manifest: duplicate subject_id " + entries[i].subject_id);
    for (const auto& e : entries) {
        require_exists(e.input, "manifest input for " + e.subject_id);
        if (!e.report.empty()) require_exists(e.report, "report for " + e.subject_id);
    }
    return entries;
}

mrd::Volume3D load_subject_volume(const ManifestEntry& e) {
    if (e.kind == "dicom_dir") return mrd::io::load_dicom_series(e.input).first;
    return mrd::io::load_portable_volume(e.input);
}

int cmd_cohort_manifest(const CohortArgs& a, const mrd::csv::Table& table) {
    const auto entries = load_manifest(a.input, &table);
    ensure_out_dir(a.out_dir);
    const fs::path dir(a.out_dir);

    const auto side = parse_laterality(a.laterality);
    std::vector<mrd::stats::CohortRecord> records(entries.size());
    mrd::csv::Table exceptions;
    exceptions.header = {"subject_id", "reason"};
    std::vector<std::pair<std::size_t, std::string>> report_failures;
    std::mutex failures_mutex;

    auto process = [&](std::size_t idx) {
        const auto& e = entries[idx];
        const auto volume = load_subject_volume(e);
        SegmentArgs seg_args = a.seg;
        seg_args.input = e.input;
        seg_args.threads = 1;  // parallelism lives at the subject level here
        const auto seg = run_segmentation(volume, seg_args, e.subject_id);
        write_segmentation(seg, seg_args, e.subject_id,
                           (dir / "subjects" / e.subject_id).string());

        mrd::BinaryMask3D breast = seg.result.breast;
        mrd::BinaryMask3D dense = seg.result.dense;
        if (side) {
            breast = select_side(breast, *side);
            dense = select_side(dense, *side);
        }
        auto density = mrd::quant::compute_density(dense, breast);

        mrd::stats::CohortRecord record;
        record.subject_id = e.subject_id;
        record.dataset = e.dataset;
        record.age = e.age;
        record.density = density.density;
        if (!e.report.empty()) {
            std::ifstream in(e.report, std::ios::binary);
            if (!in) fail(ErrorKind::Io, "cannot read report " + e.report);
            std::ostringstream text;
            text << in.rdbuf();
            try {
                record.mammo_category = mrd::stats::parse_density_category(text.str());
            } catch (const mrd::Error& err) {
                std::lock_guard<std::mutex> lock(failures_mutex);
                report_failures.emplace_back(idx, err.what());
            }
        }
        records[idx] = std::move(record);
    };

    const int cap = std::max(1, mrd::seg::resolve_thread_cap(a.threads));
    if (cap <= 1 || entries.size() <= 1) {
        for (std::size_t i = 0; i < entries.size(); ++i) process(i);
    } else {
        // Block-cyclic split; each subject writes only under its own
        // directory, so workers never share an output path.
        const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cap),
                                                   entries.size());
        std::vector<std::future<void>> futures;
        futures.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            futures.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < entries.size(); i += workers) process(i);
            }));
        std::exception_ptr first_error;
        for (auto& f : futures) {
            try {
                f.get();
            } catch (...) {
                if (!first_error) first_error = std::current_exception();
            }
        }
        if (first_error) std::rethrow_exception(first_error);
    }

    std::sort(report_failures.begin(), report_failures.end());
    for (const auto& [idx, reason] : report_failures)
        exceptions.rows.push_back({entries[idx].subject_id, reason});

    mrd::stats::save_cohort_csv((dir / "cohort.csv").string(), records);
    mrd::csv::write_file((dir / "report_exceptions.csv").string(), exceptions);
    write_cohort_tables(records, a);
    if (!exceptions.rows.empty())
        std::cout << "warning: " << exceptions.rows.size()
                  << " reports without a recognizable category (see report_exceptions.csv)\n";
    return 0;
}

int cmd_cohort(const CohortArgs& a) {
    require_exists(a.input, "cohort input");
    const auto table = mrd::csv::parse_file(a.input);
    const std::vector<std::string> manifest_header = {"subject_id", "input", "kind",
                                                      "age",        "report", "dataset"};
    if (table.header == manifest_header) return cmd_cohort_manifest(a, table);
    const auto records = mrd::stats::cohort_from_table(table);
    write_cohort_tables(records, a);
    return 0;
}

// ---------------------------------------------------------------------------
// correlate

struct CorrelateArgs {
    std::string input;
    std::string out_dir;
};

int cmd_correlate(const CorrelateArgs& a) {
    require_exists(a.input, "cohort csv");
    const auto records = mrd::stats::load_cohort_csv(a.input);

    std::vector<double> densities, ranks;
    std::array<std::vector<double>, 4> per_category;
    for (const auto& r : records) {
        if (!r.mammo_category) continue;
        densities.push_back(r.density);
        ranks.push_back(static_cast<double>(mrd::stats::category_rank(*r.mammo_category)));
        per_category[static_cast<std::size_t>(
                         mrd::stats::category_rank(*r.mammo_category) - 1)]
            .push_back(r.density);
    }
    if (densities.size() < 3)
        fail(ErrorKind::InvalidInput,
             "correlate: need at least 3 records with a mammographic category, got " +
                 std::to_string(densities.size()));

    const auto rho = mrd::stats::spearman(densities, ranks);
    const auto tau = mrd::stats::kendall(densities, ranks);
    auto print = [](const mrd::stats::CorrelationResult& r) {
        std::cout << r.method << " n " << r.n << " coefficient "
                  << fmt_fixed(r.coefficient, 6) << " p " << fmt_sig(r.p_value) << "\n";
    };
    print(rho);
    print(tau);

    mrd::csv::Table table;
    table.header = {"category", "n", "mean", "stddev", "min", "q1", "median", "q3", "max"};
    for (int c = 0; c < 4; ++c) {
        const auto& values = per_category[static_cast<std::size_t>(c)];
        if (values.empty()) continue;
        const auto s = mrd::stats::summarize(values);
        table.rows.push_back(
            {mrd::stats::category_token(static_cast<mrd::stats::DensityCategory>(c + 1)),
             std::to_string(s.n), mrd::stats::format_double(s.mean),
             mrd::stats::format_double(s.stddev), mrd::stats::format_double(s.min),
             mrd::stats::format_double(s.q1), mrd::stats::format_double(s.median),
             mrd::stats::format_double(s.q3), mrd::stats::format_double(s.max)});
    }
    for (const auto& row : table.rows) std::cout << mrd::csv::format_row(row);
    if (!a.out_dir.empty()) {
        ensure_out_dir(a.out_dir);
        mrd::csv::write_file((fs::path(a.out_dir) / "category_stats.csv").string(), table);
    }
    return 0;
}

// ---------------------------------------------------------------------------

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidInput:
        case ErrorKind::Io:
            return 2;
        case ErrorKind::Backend:
        case ErrorKind::Computation:
            return 3;
    }
    return 3;
}

void add_segment_options(CLI::App* c, SegmentArgs& args) {
    c->add_option("--patch-size", args.patch_size, "Cubic patch edge length")
        ->capture_default_str();
    c->add_option("--steps", args.steps, "Patches per axis as sx,sy,sz")
        ->capture_default_str();
    c->add_option("--threshold", args.threshold, "Probability binarization threshold")
        ->capture_default_str();
    c->add_option("--breast-backend", args.breast_backend,
                  "Breast stage backend: fcm[:opts], oracle:<mask.mhdr>, import:<probs.mhdr>")
        ->capture_default_str();
    c->add_option("--dense-backend", args.dense_backend,
                  "Dense stage backend (same grammar as --breast-backend)")
        ->capture_default_str();
}

int run(int argc, char** argv) {
    CLI::App app{"Breast MRI density quantification pipeline"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand(
        "ingest", "Convert a DICOM series or portable volume into the portable format");
    c_ingest->add_option("--input", ingest.input, "DICOM directory or portable header")
        ->required();
    c_ingest->add_option("--format", ingest.format, "auto, dicom or portable")
        ->check(CLI::IsMember({"auto", "dicom", "portable"}))
        ->capture_default_str();
    c_ingest->add_option("--out", ingest.out, "Output header path (.mhdr)")->required();

    SegmentArgs segment;
    auto* c_segment =
        app.add_subcommand("segment", "Segment breast and dense tissue of one volume");
    c_segment->add_option("--config", segment.config,
                          "Config file with `key = value` lines named after the long options");
    c_segment->add_option("--input", segment.input, "Portable volume header")->required();
    c_segment->add_option("--out-dir", segment.out_dir, "Directory for masks and run record")
        ->required();
    c_segment->add_option("--subject", segment.subject, "Subject id for the run record");
    add_segment_options(c_segment, segment);
    c_segment->add_option("--threads", segment.threads,
                          "Fusion worker cap; 0 uses MRDENSITY_THREADS, then hardware")
        ->capture_default_str();

    QuantifyArgs quantify;
    auto* c_quantify =
        app.add_subcommand("quantify", "Density ratio and slice profile from a mask pair");
    c_quantify->add_option("--breast", quantify.breast, "Breast mask header")->required();
    c_quantify->add_option("--dense", quantify.dense, "Dense mask header")->required();
    c_quantify->add_option("--subject", quantify.subject, "Subject id for CSV output")
        ->capture_default_str();
    c_quantify
        ->add_option("--laterality", quantify.laterality,
                     "whole, left, right, contralateral:left or contralateral:right")
        ->capture_default_str();
    c_quantify->add_option("--profile", quantify.profile_axis,
                           "Emit per-slice densities along axis x, y or z");
    c_quantify->add_option("--out-csv", quantify.out_csv, "Write the density record CSV here");
    c_quantify->add_option("--out-profile", quantify.out_profile,
                           "Write the slice profile CSV here instead of stdout");

    EvaluateArgs evaluate;
    auto* c_evaluate =
        app.add_subcommand("evaluate", "Dice and Hausdorff distance between two masks");
    c_evaluate->add_option("--test", evaluate.test, "Predicted mask header")->required();
    c_evaluate->add_option("--ref", evaluate.reference, "Reference mask header")->required();
    c_evaluate->add_option("--spacing", evaluate.spacing,
                           "Optional sx,sy,sz weighting for the Hausdorff distance");

    CohortArgs cohort;
    auto* c_cohort = app.add_subcommand(
        "cohort", "Summaries from a cohort CSV, or batch pipeline from a manifest");
    c_cohort->add_option("--config", cohort.config,
                         "Config file with `key = value` lines named after the long options");
    c_cohort->add_option("--input", cohort.input, "Cohort CSV or manifest CSV")->required();
    c_cohort->add_option("--out-dir", cohort.out_dir, "Directory for output tables")
        ->required();
    c_cohort->add_option("--bin-width", cohort.bin_width, "Histogram bin width")
        ->capture_default_str();
    c_cohort
        ->add_option("--laterality", cohort.laterality,
                     "Breast side to quantify in manifest mode")
        ->capture_default_str();
    c_cohort->add_option("--threads", cohort.threads,
                         "Manifest-mode subject workers; 0 uses MRDENSITY_THREADS");
    add_segment_options(c_cohort, cohort.seg);

    CorrelateArgs correlate;
    auto* c_correlate = app.add_subcommand(
        "correlate", "Rank correlations between density and mammographic category");
    c_correlate->add_option("--input", correlate.input, "Cohort CSV with categories")
        ->required();
    c_correlate->add_option("--out-dir", correlate.out_dir,
                            "Write category_stats.csv here as well");

    ParseReportsArgs parse_reports;
    auto* c_parse = app.add_subcommand(
        "parse-reports", "Assign density categories from report text");
    c_parse
        ->add_option("--input", parse_reports.input,
                     "Directory of .txt reports or a subject_id,report_text CSV")
        ->required();
    c_parse->add_option("--out-dir", parse_reports.out_dir,
                        "Directory for categories.csv and exceptions.csv")
        ->required();

    PhantomArgs phantom;
    auto* c_phantom =
        app.add_subcommand("phantom", "Generate a synthetic volume with truth masks");
    c_phantom->add_option("--spec", phantom.spec_file, "Phantom spec key = value file");
    c_phantom->add_option("--out", phantom.out, "Output volume header path")->required();
    c_phantom->add_option("--dims", phantom.dims, "Override grid dims as nx,ny,nz");
    c_phantom->add_option("--noise-sigma", phantom.noise_sigma, "Override noise sigma");
    c_phantom->add_option("--seed", phantom.seed, "Override noise seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (c_ingest->parsed()) return cmd_ingest(ingest);
    if (c_segment->parsed()) {
        if (!segment.config.empty()) {
            require_exists(segment.config, "config file");
            ConfigOverrides cfg(c_segment, segment.config);
            cfg.apply_string("subject", segment.subject);
            cfg.apply_int("threads", segment.threads);
            apply_shared_segment_config(cfg, segment);
            cfg.finish();
        }
        return cmd_segment(segment);
    }
    if (c_quantify->parsed()) return cmd_quantify(quantify);
    if (c_evaluate->parsed()) return cmd_evaluate(evaluate);
    if (c_cohort->parsed()) {
        if (!cohort.config.empty()) {
            require_exists(cohort.config, "config file");
            ConfigOverrides cfg(c_cohort, cohort.config);
            cfg.apply_double("bin-width", cohort.bin_width);
            cfg.apply_string("laterality", cohort.laterality);
            cfg.apply_int("threads", cohort.threads);
            apply_shared_segment_config(cfg, cohort.seg);
            cfg.finish();
        }
        return cmd_cohort(cohort);
    }
    if (c_correlate->parsed()) return cmd_correlate(correlate);
    if (c_parse->parsed()) return cmd_parse_reports(parse_reports);
    if (c_phantom->parsed()) return cmd_phantom(phantom);
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mrd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
