#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "mrd/classify.hpp"
#include "mrd/cohort.hpp"
#include "mrd/cohort_csv.hpp"
#include "mrd/correlation.hpp"
#include "mrd/reports.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using mrd::stats::CohortRecord;
using mrd::stats::DensityCategory;
using testutil::TempDir;

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

std::string message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const mrd::Error& e) {
        return e.what();
    }
    FAIL("expected an error");
    return {};
}

CohortRecord rec(const std::string& id, const std::string& dataset, double density,
                 std::optional<double> age = {},
                 std::optional<DensityCategory> cat = {}) {
    CohortRecord r;
    r.subject_id = id;
    r.dataset = dataset;
    r.density = density;
    r.age = age;
    r.mammo_category = cat;
    return r;
}

}  // namespace

TEST_CASE("category tokens round trip and reject junk") {
    using namespace mrd::stats;
    for (auto c : {DensityCategory::AlmostEntirelyFatty, DensityCategory::ScatteredFibroglandular,
                   DensityCategory::HeterogeneouslyDense, DensityCategory::ExtremelyDense}) {
        auto token = category_token(c);
        auto back = category_from_token(token);
        REQUIRE(back.has_value());
        CHECK(*back == c);
    }
    CHECK(category_token(DensityCategory::HeterogeneouslyDense) == "heterogeneously_dense");
    CHECK_FALSE(category_from_token("").has_value());
    CHECK(kind_of([] { mrd::stats::category_from_token("dense-ish"); }) ==
          mrd::ErrorKind::InvalidInput);
    CHECK(category_rank(DensityCategory::AlmostEntirelyFatty) == 1);
    CHECK(category_rank(DensityCategory::ExtremelyDense) == 4);
}

TEST_CASE("report prose maps onto the four density categories") {
    using mrd::stats::parse_density_category;
    CHECK(parse_density_category("The breasts are almost entirely fatty.") ==
          DensityCategory::AlmostEntirelyFatty);
    CHECK(parse_density_category("Predominantly fatty tissue is noted.") ==
          DensityCategory::AlmostEntirelyFatty);
    CHECK(parse_density_category("There are scattered fibroglandular densities.") ==
          DensityCategory::ScatteredFibroglandular);
    CHECK(parse_density_category(
              "The breast tissue is heterogeneously dense, which may obscure small masses.") ==
          DensityCategory::HeterogeneouslyDense);
    CHECK(parse_density_category("Heterogeneously fibroglandular parenchyma.") ==
          DensityCategory::HeterogeneouslyDense);
    CHECK(parse_density_category("The breasts are extremely dense.") ==
          DensityCategory::ExtremelyDense);
    CHECK(parse_density_category("Extremely fibroglandular breast tissue.") ==
          DensityCategory::ExtremelyDense);
}

TEST_CASE("report parsing normalizes case and whitespace") {
    using mrd::stats::parse_density_category;
    CHECK(parse_density_category("EXTREMELY    DENSE") == DensityCategory::ExtremelyDense);
    CHECK(parse_density_category("Scattered\n\tfibroglandular elements") ==
          DensityCategory::ScatteredFibroglandular);
    CHECK(parse_density_category("  heterogeneously\r\n dense  ") ==
          DensityCategory::HeterogeneouslyDense);
}

TEST_CASE("when several families match, the densest one wins") {
    using mrd::stats::parse_density_category;
    CHECK(parse_density_category("Previously scattered fibroglandular, now heterogeneously "
                                 "dense.") == DensityCategory::HeterogeneouslyDense);
    CHECK(parse_density_category("No longer extremely dense; scattered fibroglandular now.") ==
          DensityCategory::ExtremelyDense);
}

TEST_CASE("unrecognized reports raise instead of defaulting") {
    CHECK(kind_of([] { mrd::stats::parse_density_category("Unremarkable examination."); }) ==
          mrd::ErrorKind::InvalidInput);
    CHECK(kind_of([] { mrd::stats::parse_density_category(""); }) ==
          mrd::ErrorKind::InvalidInput);
    CHECK(kind_of([] { mrd::stats::parse_density_category("dense"); }) ==
          mrd::ErrorKind::InvalidInput);  // bare word is not a density phrase
}

TEST_CASE("summary statistics match hand computation") {
    std::vector<double> v{0.1, 0.2, 0.3};
    auto s = mrd::stats::summarize(v);
    CHECK(s.n == 3);
    CHECK(s.mean == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(s.stddev == doctest::Approx(0.0816496580927726).epsilon(1e-12));
    CHECK(s.min == 0.1);
    CHECK(s.max == 0.3);
    CHECK(s.q1 == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(s.median == 0.2);
    CHECK(s.q3 == doctest::Approx(0.25).epsilon(1e-15));

    std::vector<double> single{0.42};
    auto s1 = mrd::stats::summarize(single);
    CHECK(s1.mean == 0.42);
    CHECK(s1.stddev == 0.0);
    CHECK(s1.q1 == 0.42);
    CHECK(s1.q3 == 0.42);

    CHECK(kind_of([] { mrd::stats::summarize(std::vector<double>{}); }) ==
          mrd::ErrorKind::InvalidInput);
    CHECK(kind_of([] {
        mrd::stats::summarize(std::vector<double>{0.1, std::nan("")});
    }) == mrd::ErrorKind::InvalidInput);
}

TEST_CASE("quartiles interpolate between order statistics") {
    // Sorted: 1..5; ranks (n-1)p = 1.0, 2.0, 3.0 -> exact order stats.
    std::vector<double> v{5, 1, 3, 2, 4};
    auto s = mrd::stats::summarize(v);
    CHECK(s.q1 == 2.0);
    CHECK(s.median == 3.0);
    CHECK(s.q3 == 4.0);
    // n = 4: ranks 0.75, 1.5, 2.25 -> interpolated.
    std::vector<double> w{10, 20, 30, 40};
    auto t = mrd::stats::summarize(w);
    CHECK(t.q1 == doctest::Approx(17.5).epsilon(1e-15));
    CHECK(t.median == doctest::Approx(25.0).epsilon(1e-15));
    CHECK(t.q3 == doctest::Approx(32.5).epsilon(1e-15));
}

TEST_CASE("cohort summaries group by dataset in sorted order") {
    std::vector<CohortRecord> records{
        rec("s1", "siteB", 0.30), rec("s2", "siteA", 0.10),
        rec("s3", "siteA", 0.20), rec("s4", "siteB", 0.50),
    };
    auto groups = mrd::stats::cohort_summary(records);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].dataset == "siteA");
    CHECK(groups[0].n == 2);
    CHECK(groups[0].mean == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(groups[0].stddev == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(groups[1].dataset == "siteB");
    CHECK(groups[1].mean == doctest::Approx(0.40).epsilon(1e-15));
    CHECK(kind_of([] { mrd::stats::cohort_summary({}); }) == mrd::ErrorKind::InvalidInput);
}

TEST_CASE("density histograms bin right-open with a closed final bin") {
    auto h = mrd::stats::density_histogram(std::vector<double>{0.05, 0.15, 0.15}, 0.1);
    REQUIRE(h.counts.size() == 10);
    REQUIRE(h.edges.size() == 11);
    CHECK(h.counts[0] == 1);
    CHECK(h.counts[1] == 2);
    for (std::size_t i = 2; i < h.counts.size(); ++i) CHECK(h.counts[i] == 0);
    CHECK(h.edges.front() == 0.0);
    CHECK(h.edges.back() == 1.0);

    SUBCASE("exactly 1.0 lands in the last bin, boundaries in the upper bin") {
        auto g = mrd::stats::density_histogram(std::vector<double>{1.0, 0.1, 0.0}, 0.1);
        CHECK(g.counts[9] == 1);
        CHECK(g.counts[1] == 1);  // 0.1 belongs to [0.1, 0.2)
        CHECK(g.counts[0] == 1);
    }
    SUBCASE("bin width that does not divide 1 clamps the final edge") {
        auto g = mrd::stats::density_histogram(std::vector<double>{0.95}, 0.3);
        REQUIRE(g.counts.size() == 4);  // ceil(1/0.3)
        CHECK(g.edges.back() == 1.0);
        CHECK(g.counts[3] == 1);
    }
    SUBCASE("default width gives fifty bins") {
        auto g = mrd::stats::density_histogram(std::vector<double>{0.5});
        CHECK(g.counts.size() == 50);
    }
    SUBCASE("out-of-range densities are rejected") {
        CHECK(kind_of([] {
            mrd::stats::density_histogram(std::vector<double>{1.2}, 0.1);
        }) == mrd::ErrorKind::InvalidInput);
        CHECK(kind_of([] {
            mrd::stats::density_histogram(std::vector<double>{-0.1}, 0.1);
        }) == mrd::ErrorKind::InvalidInput);
        CHECK(kind_of([] {
            mrd::stats::density_histogram(std::vector<double>{0.5}, 0.0);
        }) == mrd::ErrorKind::InvalidInput);
    }
}

TEST_CASE("age bins cover the decades 20-89 and count exclusions") {
    std::vector<CohortRecord> records{
        rec("a", "d", 0.10, 25.0), rec("b", "d", 0.20, 25.0),
        rec("c", "d", 0.30, 34.0), rec("d", "d", 0.40, 67.0),
        rec("e", "d", 0.50, 19.0),   // below range
        rec("f", "d", 0.60, 90.0),   // above range
        rec("g", "d", 0.70),         // missing age
    };
    auto stats = mrd::stats::age_group_stats(records);
    CHECK(stats.excluded == 3);
    REQUIRE(stats.bins.size() == 3);
    CHECK(stats.bins[0].low == 20);
    CHECK(stats.bins[0].high == 29);
    CHECK(stats.bins[0].stats.n == 2);
    CHECK(stats.bins[0].stats.mean == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(stats.bins[1].low == 30);
    CHECK(stats.bins[1].stats.n == 1);
    CHECK(stats.bins[2].low == 60);
    // Boundary: exactly 20 is included, exactly 90 is not.
    auto edge = mrd::stats::age_group_stats({rec("x", "d", 0.1, 20.0)});
    CHECK(edge.excluded == 0);
    CHECK(edge.bins.size() == 1);
    CHECK(edge.bins[0].low == 20);
}

TEST_CASE("cohort csv round trips every field exactly") {
    TempDir dir("cohort-rt");
    std::vector<CohortRecord> records{
        rec("s-001", "duke", 1.0 / 3.0, 47.0, DensityCategory::HeterogeneouslyDense),
        rec("s-002", "duke", 0.1),
        rec("s-003", "isb", 0.0, {}, DensityCategory::AlmostEntirelyFatty),
        rec("s-004", "isb", 1.0, 61.5),
    };
    auto path = dir.file("cohort.csv");
    mrd::stats::save_cohort_csv(path, records);
    auto back = mrd::stats::load_cohort_csv(path);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].subject_id == records[i].subject_id);
        CHECK(back[i].dataset == records[i].dataset);
        CHECK(back[i].age == records[i].age);
        CHECK(back[i].density == records[i].density);  // bitwise, via shortest round trip
        CHECK(back[i].mammo_category == records[i].mammo_category);
    }
    auto text = testutil::read_text(path);
    CHECK(text.rfind(mrd::stats::kCohortCsvHeader, 0) == 0);
}

TEST_CASE("cohort csv parsing pinpoints bad rows") {
    using mrd::stats::parse_cohort_csv;
    const std::string header = "subject_id,dataset,age,density,mammo_category\n";
    CHECK(message_of([&] { parse_cohort_csv("id,density\nx,0.5\n"); }).find("header") !=
          std::string::npos);
    CHECK(message_of([&] { parse_cohort_csv(header + "s1,d,,0.5\n"); }).find("row 2") !=
          std::string::npos);
    CHECK(message_of([&] {
              parse_cohort_csv(header + "s1,d,,0.5,\ns2,d,,1.5,\n");
          }).find("row 3") != std::string::npos);
    CHECK(kind_of([&] { parse_cohort_csv(header + "s1,d,,abc,\n"); }) ==
          mrd::ErrorKind::InvalidInput);
    CHECK(kind_of([&] { parse_cohort_csv(header + "s1,d,-4,0.5,\n"); }) ==
          mrd::ErrorKind::InvalidInput);
    CHECK(kind_of([&] { parse_cohort_csv(header + "s1,d,,0.5,weird\n"); }) ==
          mrd::ErrorKind::InvalidInput);
    CHECK(kind_of([&] { parse_cohort_csv(header + ",d,,0.5,\n"); }) ==
          mrd::ErrorKind::InvalidInput);
    // A well-formed file parses.
    auto ok = parse_cohort_csv(header + "s1,d,55,0.25,fatty\n");
    REQUIRE(ok.size() == 1);
    CHECK(ok[0].age == 55.0);
    CHECK(ok[0].mammo_category == DensityCategory::AlmostEntirelyFatty);
}

TEST_CASE("number formatting is shortest-round-trip and parsing is strict") {
    using mrd::stats::format_double;
    using mrd::stats::parse_double;
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(parse_double(format_double(1.0 / 3.0), "t") == 1.0 / 3.0);
    CHECK(parse_double("1e3", "t") == 1000.0);
    std::mt19937_64 rng(301);
    for (int i = 0; i < 500; ++i) {
        double v = (testutil::uniform01(rng) - 0.5) * 1e6;
        CHECK(parse_double(format_double(v), "t") == v);
    }
    CHECK(kind_of([] { mrd::stats::parse_double("nan", "t"); }) == mrd::ErrorKind::InvalidInput);
    CHECK(kind_of([] { mrd::stats::parse_double("12x", "t"); }) == mrd::ErrorKind::InvalidInput);
    CHECK(kind_of([] { mrd::stats::parse_double("", "t"); }) == mrd::ErrorKind::InvalidInput);
    CHECK(kind_of([] { mrd::stats::parse_double("inf", "t"); }) == mrd::ErrorKind::InvalidInput);
}

TEST_CASE("rank averaging uses midranks for ties") {
    auto r = mrd::stats::average_ranks(std::vector<double>{10, 20, 20, 30});
    CHECK((r == std::vector<double>{1.0, 2.5, 2.5, 4.0}));
    auto all_equal = mrd::stats::average_ranks(std::vector<double>{7, 7, 7});
    CHECK((all_equal == std::vector<double>{2.0, 2.0, 2.0}));
    std::mt19937_64 rng(302);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v;
        int n = testutil::uniform_int(rng, 1, 15);
        for (int i = 0; i < n; ++i)
            v.push_back(testutil::uniform_int(rng, 0, 5) / 2.0);
        auto lib = mrd::stats::average_ranks(v);
        auto ref = oracle::brute_ranks(v);
        REQUIRE(lib.size() == ref.size());
        for (std::size_t i = 0; i < lib.size(); ++i) CHECK(lib[i] == ref[i]);
    }
}

TEST_CASE("rank correlation on the worked four-point example") {
    std::vector<double> x{1, 2, 3, 4};
    std::vector<double> y{1, 3, 2, 4};
    auto s = mrd::stats::spearman(x, y);
    CHECK(s.method == "spearman");
    CHECK(s.n == 4);
    CHECK(s.coefficient == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(s.p_value > 0.0);
    CHECK(s.p_value < 1.0);

    auto k = mrd::stats::kendall(x, y);
    CHECK(k.method == "kendall");
    CHECK(k.coefficient == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // Perfect monotone association pins both coefficients.
    std::vector<double> z{10, 20, 30, 40};
    CHECK(mrd::stats::spearman(x, z).coefficient == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mrd::stats::spearman(x, z).p_value == 0.0);
    CHECK(mrd::stats::kendall(x, z).coefficient == doctest::Approx(1.0).epsilon(1e-15));
    std::vector<double> w{4, 3, 2, 1};
    CHECK(mrd::stats::spearman(x, w).coefficient == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(mrd::stats::spearman(x, w).p_value == 0.0);
}

TEST_CASE("rank correlations agree with brute force over tied random data") {
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 200; ++trial) {
        int n = testutil::uniform_int(rng, 3, 12);
        std::vector<double> x, y;
        bool ok = false;
        while (!ok) {
            x.clear();
            y.clear();
            for (int i = 0; i < n; ++i) {
                x.push_back(testutil::uniform_int(rng, 0, 4) / 2.0);
                y.push_back(testutil::uniform_int(rng, 0, 4) / 2.0);
            }
            auto constant = [](const std::vector<double>& v) {
                return std::all_of(v.begin(), v.end(), [&](double t) { return t == v[0]; });
            };
            ok = !constant(x) && !constant(y);
        }
        auto s = mrd::stats::spearman(x, y);
        auto k = mrd::stats::kendall(x, y);
        CHECK(std::abs(s.coefficient - oracle::brute_spearman(x, y)) < 1e-12);
        CHECK(std::abs(k.coefficient - oracle::brute_kendall(x, y)) < 1e-12);
    }
}

TEST_CASE("correlation preconditions are enforced") {
    std::vector<double> x{1, 2, 3};
    std::vector<double> bad_len{1, 2};
    std::vector<double> constant{5, 5, 5};
    std::vector<double> with_nan{1, std::nan(""), 3};
    for (auto fn : {+[](std::span<const double> a, std::span<const double> b) {
                        return mrd::stats::spearman(a, b);
                    },
                    +[](std::span<const double> a, std::span<const double> b) {
                        return mrd::stats::kendall(a, b);
                    }}) {
        CHECK(kind_of([&] { fn(x, bad_len); }) == mrd::ErrorKind::InvalidInput);
        CHECK(kind_of([&] { fn(bad_len, bad_len); }) == mrd::ErrorKind::InvalidInput);
        CHECK(kind_of([&] { fn(x, constant); }) == mrd::ErrorKind::InvalidInput);
        CHECK(kind_of([&] { fn(constant, x); }) == mrd::ErrorKind::InvalidInput);
        CHECK(kind_of([&] { fn(x, with_nan); }) == mrd::ErrorKind::InvalidInput);
    }
}

TEST_CASE("stronger monotone association yields smaller p-values") {
    std::vector<double> x, y_strong, y_weak;
    std::mt19937_64 rng(304);
    for (int i = 0; i < 30; ++i) {
        x.push_back(i);
        y_strong.push_back(i + 0.01 * testutil::uniform01(rng));
        y_weak.push_back(testutil::uniform01(rng) + 0.02 * i);
    }
    auto strong = mrd::stats::spearman(x, y_strong);
    auto weak = mrd::stats::spearman(x, y_weak);
    CHECK(strong.p_value < 1e-6);
    CHECK(strong.p_value <= weak.p_value);
    auto tau = mrd::stats::kendall(x, y_strong);
    CHECK(tau.p_value < 1e-6);
}

TEST_CASE("binary ranking score on the worked example") {
    std::vector<double> scores{0.9, 0.4, 0.5, 0.1};
    std::vector<int> labels{1, 1, 0, 0};
    CHECK(mrd::stats::auc_binary(scores, labels) == 0.75);

    std::vector<double> tied{0.5, 0.5};
    std::vector<int> tl{1, 0};
    CHECK(mrd::stats::auc_binary(tied, tl) == 0.5);

    std::vector<double> sep{0.9, 0.8, 0.2, 0.1};
    CHECK(mrd::stats::auc_binary(sep, labels) == 1.0);
    std::vector<int> inverted{0, 0, 1, 1};
    CHECK(mrd::stats::auc_binary(sep, inverted) == 0.0);
}

TEST_CASE("midrank and pair-counting formulations of ranking score coincide") {
    std::mt19937_64 rng(305);
    for (int trial = 0; trial < 100; ++trial) {
        int n = testutil::uniform_int(rng, 2, 40);
        std::vector<double> scores;
        std::vector<int> labels;
        std::vector<double> pos, neg;
        for (int i = 0; i < n; ++i) {
            double s = testutil::uniform_int(rng, 0, 10) / 4.0;  // heavy ties
            int label = testutil::uniform01(rng) < 0.5 ? 1 : 0;
            scores.push_back(s);
            labels.push_back(label);
            (label ? pos : neg).push_back(s);
        }
        if (pos.empty() || neg.empty()) continue;
        CHECK(mrd::stats::auc_binary(scores, labels) == oracle::brute_auc(pos, neg));
    }
}

TEST_CASE("binary ranking score validates labels") {
    std::vector<double> s{0.1, 0.2};
    CHECK(kind_of([&] { mrd::stats::auc_binary(s, std::vector<int>{1, 1}); }) ==
          mrd::ErrorKind::InvalidInput);
    CHECK(kind_of([&] { mrd::stats::auc_binary(s, std::vector<int>{0, 0}); }) ==
          mrd::ErrorKind::InvalidInput);
    CHECK(kind_of([&] { mrd::stats::auc_binary(s, std::vector<int>{1, 2}); }) ==
          mrd::ErrorKind::InvalidInput);
    CHECK(kind_of([&] { mrd::stats::auc_binary(s, std::vector<int>{1}); }) ==
          mrd::ErrorKind::InvalidInput);
}

TEST_CASE("density thresholds classify with boundaries going up") {
    mrd::stats::ThresholdClassifier c;
    c.thresholds = {0.25, 0.5, 0.75};
    using mrd::stats::classify_density;
    CHECK(classify_density(c, 0.0) == DensityCategory::AlmostEntirelyFatty);
    CHECK(classify_density(c, 0.249) == DensityCategory::AlmostEntirelyFatty);
    CHECK(classify_density(c, 0.25) == DensityCategory::ScatteredFibroglandular);
    CHECK(classify_density(c, 0.5) == DensityCategory::HeterogeneouslyDense);
    CHECK(classify_density(c, 0.75) == DensityCategory::ExtremelyDense);
    CHECK(classify_density(c, 1.0) == DensityCategory::ExtremelyDense);
    CHECK(kind_of([&] { classify_density(c, -0.1); }) == mrd::ErrorKind::InvalidInput);
    CHECK(kind_of([&] { classify_density(c, 1.1); }) == mrd::ErrorKind::InvalidInput);

    mrd::stats::ThresholdClassifier bad;
    bad.thresholds = {0.5, 0.5, 0.75};
    CHECK(kind_of([&] { classify_density(bad, 0.3); }) == mrd::ErrorKind::InvalidInput);
}

namespace {

/// Synthetic cohort whose density bands match the category bands exactly.
std::vector<CohortRecord> banded_cohort(int per_category, double jitter_seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(jitter_seed));
    const double lo[] = {0.00, 0.15, 0.40, 0.70};
    const double hi[] = {0.10, 0.30, 0.60, 0.95};
    const DensityCategory cats[] = {
        DensityCategory::AlmostEntirelyFatty, DensityCategory::ScatteredFibroglandular,
        DensityCategory::HeterogeneouslyDense, DensityCategory::ExtremelyDense};
    std::vector<CohortRecord> records;
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < per_category; ++i) {
            double d = lo[c] + (hi[c] - lo[c]) * testutil::uniform01(rng);
            records.push_back(rec("s" + std::to_string(c) + "_" + std::to_string(i), "synth",
                                  d, 50.0, cats[c]));
        }
    return records;
}

/// Exhaustive reference search over every ascending triple of adjacent-value
/// midpoints, evaluated on the same records. Returns {best accuracy,
/// lexicographically smallest argmax}.
std::pair<double, std::array<double, 3>> brute_best_thresholds(
    const std::vector<CohortRecord>& records) {
    std::vector<double> values;
    for (const auto& r : records) values.push_back(r.density);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<double> cuts;
    for (std::size_t i = 1; i < values.size(); ++i)
        cuts.push_back((values[i - 1] + values[i]) / 2.0);

    auto accuracy_of = [&](double t1, double t2, double t3) {
        mrd::stats::ThresholdClassifier c;
        c.thresholds = {t1, t2, t3};
        int hits = 0;
        for (const auto& r : records)
            if (r.mammo_category &&
                mrd::stats::classify_density(c, r.density) == *r.mammo_category)
                ++hits;
        return static_cast<double>(hits) / static_cast<double>(records.size());
    };

    double best = -1.0;
    std::array<double, 3> arg{0, 0, 0};
    for (std::size_t i = 0; i < cuts.size(); ++i)
        for (std::size_t j = i + 1; j < cuts.size(); ++j)
            for (std::size_t k = j + 1; k < cuts.size(); ++k) {
                double a = accuracy_of(cuts[i], cuts[j], cuts[k]);
                if (a > best) {
                    best = a;
                    arg = {cuts[i], cuts[j], cuts[k]};
                }
            }
    return {best, arg};
}

}  // namespace

TEST_CASE("threshold fitting separates clean bands perfectly") {
    auto records = banded_cohort(15, 7);
    auto fit = mrd::stats::fit_threshold_classifier(records, 0.8, 42);
    CHECK(fit.n_train == 48);  // 0.8 * 60
    CHECK(fit.n_test == 12);
    CHECK(fit.n_excluded == 0);
    CHECK(fit.train_accuracy == 1.0);
    REQUIRE(fit.test_accuracy.has_value());
    CHECK(*fit.test_accuracy == 1.0);
    CHECK(fit.model.thresholds[0] > 0.10);
    CHECK(fit.model.thresholds[0] < 0.15);
    CHECK(fit.model.thresholds[1] > 0.30);
    CHECK(fit.model.thresholds[1] < 0.40);
    CHECK(fit.model.thresholds[2] > 0.60);
    CHECK(fit.model.thresholds[2] < 0.70);
}

TEST_CASE("threshold fitting matches an exhaustive reference search") {
    // Overlapping bands so a perfect split is impossible; train on the whole
    // cohort (ratio 1) so the reference search sees the same sample.
    std::mt19937_64 rng(306);
    std::vector<CohortRecord> records;
    const DensityCategory cats[] = {
        DensityCategory::AlmostEntirelyFatty, DensityCategory::ScatteredFibroglandular,
        DensityCategory::HeterogeneouslyDense, DensityCategory::ExtremelyDense};
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < 12; ++i) {
            double center = 0.2 * c + 0.15;
            double d = std::clamp(center + 0.25 * (testutil::uniform01(rng) - 0.5), 0.0, 1.0);
            records.push_back(
                rec("r" + std::to_string(c * 12 + i), "synth", d, {}, cats[c]));
        }
    auto fit = mrd::stats::fit_threshold_classifier(records, 1.0, 9);
    CHECK_FALSE(fit.test_accuracy.has_value());
    auto [best, arg] = brute_best_thresholds(records);
    CHECK(fit.train_accuracy == best);
    CHECK(fit.model.thresholds[0] == arg[0]);
    CHECK(fit.model.thresholds[1] == arg[1]);
    CHECK(fit.model.thresholds[2] == arg[2]);
}

TEST_CASE("threshold fitting is deterministic for a fixed seed") {
    auto records = banded_cohort(10, 11);
    auto a = mrd::stats::fit_threshold_classifier(records, 0.8, 123);
    auto b = mrd::stats::fit_threshold_classifier(records, 0.8, 123);
    CHECK(a.model.thresholds == b.model.thresholds);
    CHECK(a.train_accuracy == b.train_accuracy);
    CHECK(a.test_accuracy == b.test_accuracy);
}

TEST_CASE("threshold fitting rejects under-populated inputs") {
    SUBCASE("uncategorized records are excluded, and can starve a category") {
        auto records = banded_cohort(8, 3);
        for (auto& r : records)
            if (r.mammo_category == DensityCategory::ExtremelyDense) r.mammo_category.reset();
        CHECK(kind_of([&] { mrd::stats::fit_threshold_classifier(records); }) ==
              mrd::ErrorKind::InvalidInput);
    }
    SUBCASE("a category with fewer than four training records fails") {
        std::vector<CohortRecord> records = banded_cohort(12, 5);
        std::erase_if(records, [](const CohortRecord& r) {
            return r.mammo_category == DensityCategory::ScatteredFibroglandular;
        });
        for (int i = 0; i < 2; ++i)
            records.push_back(rec("few" + std::to_string(i), "synth", 0.2 + 0.01 * i, {},
                                  DensityCategory::ScatteredFibroglandular));
        auto msg = message_of([&] { mrd::stats::fit_threshold_classifier(records, 1.0, 0); });
        CHECK(msg.find("Scattered") != std::string::npos);
    }
    SUBCASE("too few distinct densities fail") {
        std::vector<CohortRecord> records;
        const DensityCategory cats[] = {DensityCategory::AlmostEntirelyFatty,
                                        DensityCategory::ScatteredFibroglandular,
                                        DensityCategory::HeterogeneouslyDense,
                                        DensityCategory::ExtremelyDense};
        for (int c = 0; c < 4; ++c)
            for (int i = 0; i < 5; ++i)
                records.push_back(
                    rec("x" + std::to_string(c * 5 + i), "d", 0.2, {}, cats[c]));
        CHECK(kind_of([&] { mrd::stats::fit_threshold_classifier(records, 1.0, 0); }) ==
              mrd::ErrorKind::InvalidInput);
    }
    SUBCASE("uncategorized records are counted") {
        auto records = banded_cohort(8, 3);
        records.push_back(rec("extra", "synth", 0.5));
        auto fit = mrd::stats::fit_threshold_classifier(records, 0.8, 1);
        CHECK(fit.n_excluded == 1);
        CHECK(fit.n_train + fit.n_test == 32);
    }
}
