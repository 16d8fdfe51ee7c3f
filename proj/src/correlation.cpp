#include "mrd/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "mrd/core.hpp"

namespace mrd::stats {

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // 1-based ranks i+1 .. j+1 share the midrank.
        const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

namespace {

void check_inputs(std::span<const double> x, std::span<const double> y, const char* op) {
    if (x.size() != y.size())
        fail(ErrorKind::InvalidInput, std::string(op) + ": length mismatch (" +
                                          std::to_string(x.size()) + " vs " +
                                          std::to_string(y.size()) + ")");
    if (x.size() < 3)
        fail(ErrorKind::InvalidInput,
             std::string(op) + ": need at least 3 paired observations");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            fail(ErrorKind::InvalidInput, std::string(op) + ": non-finite value");
    auto constant = [](std::span<const double> v) {
        for (double e : v)
            if (e != v[0]) return false;
        return true;
    };
    if (constant(x) || constant(y))
        fail(ErrorKind::InvalidInput,
             std::string(op) + ": constant input vector, correlation undefined");
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

// Pairs i<j with values[i] > values[j], counted by merge sort.
std::int64_t count_inversions(std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<double> buf(n);
    std::int64_t inversions = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
            const std::size_t mid = lo + width;
            const std::size_t hi = std::min(lo + 2 * width, n);
            std::size_t a = lo, b = mid, w = lo;
            while (a < mid && b < hi) {
                if (values[b] < values[a]) {
                    inversions += static_cast<std::int64_t>(mid - a);
                    buf[w++] = values[b++];
                } else {
                    buf[w++] = values[a++];
                }
            }
            while (a < mid) buf[w++] = values[a++];
            while (b < hi) buf[w++] = values[b++];
            std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
                      buf.begin() + static_cast<std::ptrdiff_t>(hi),
                      values.begin() + static_cast<std::ptrdiff_t>(lo));
        }
    }
    return inversions;
}

// Sum over equal-value runs of k*(k-1)/2; input must be sorted runs.
template <typename Equal>
std::int64_t tied_pairs(std::size_t n, Equal equal) {
    std::int64_t ties = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && equal(j, j + 1)) ++j;
        const auto k = static_cast<std::int64_t>(j - i + 1);
        ties += k * (k - 1) / 2;
        i = j + 1;
    }
    return ties;
}

}  // namespace

CorrelationResult spearman(std::span<const double> x, std::span<const double> y) {
    check_inputs(x, y, "spearman");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    double rho = std::clamp(pearson(rx, ry), -1.0, 1.0);

    CorrelationResult r;
    r.method = "spearman";
    r.coefficient = rho;
    r.n = static_cast<std::int64_t>(x.size());
    const double one_minus = (1.0 - rho) * (1.0 + rho);
    if (one_minus <= 1e-15) {
        r.p_value = 0.0;
    } else {
        const auto df = static_cast<double>(r.n - 2);
        const double t = rho * std::sqrt(df / one_minus);
        boost::math::students_t dist(df);
        r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
    return r;
}

CorrelationResult kendall(std::span<const double> x, std::span<const double> y) {
    check_inputs(x, y, "kendall");
    const std::size_t n = x.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    const auto tot = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
    const std::int64_t xties =
        tied_pairs(n, [&](std::size_t a, std::size_t b) { return x[order[a]] == x[order[b]]; });
    const std::int64_t joint_ties = tied_pairs(n, [&](std::size_t a, std::size_t b) {
        return x[order[a]] == x[order[b]] && y[order[a]] == y[order[b]];
    });

    std::vector<double> y_sorted_by_x(n);
    for (std::size_t i = 0; i < n; ++i) y_sorted_by_x[i] = y[order[i]];
    std::vector<double> y_values = y_sorted_by_x;
    const std::int64_t discordant = count_inversions(y_values);  // sorts y_values
    const std::int64_t yties =
        tied_pairs(n, [&](std::size_t a, std::size_t b) { return y_values[a] == y_values[b]; });

    // Concordant-minus-discordant via the tie-corrected pair identity.
    const std::int64_t cmd = tot - xties - yties + joint_ties - 2 * discordant;
    const double denom = std::sqrt(static_cast<double>(tot - xties)) *
                         std::sqrt(static_cast<double>(tot - yties));
    double tau = std::clamp(static_cast<double>(cmd) / denom, -1.0, 1.0);

    CorrelationResult r;
    r.method = "kendall";
    r.coefficient = tau;
    r.n = static_cast<std::int64_t>(n);
    const auto nd = static_cast<double>(n);
    const double z = 3.0 * tau * std::sqrt(nd * (nd - 1.0)) / std::sqrt(2.0 * (2.0 * nd + 5.0));
    r.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
    return r;
}

}  // namespace mrd::stats
