#include "explab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace explab {

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        // result * num / i is exact at every step; guard the multiply.
        const std::uint64_t g = std::gcd(result, i);
        const std::uint64_t r = result / g;
        const std::uint64_t d = i / g;
        if (r > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
        result = r * (num / d);
    }
    return result;
}

// ---------------------------------------------------------------------------
// k-means

std::vector<std::string> cluster_names(std::size_t k) {
    if (k == 1) return {"all"};
    if (k == 2) return {"low", "high"};
    if (k == 3) return {"low", "medium", "high"};
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) names.push_back("c" + std::to_string(i + 1));
    return names;
}

namespace {

std::size_t nearest(const std::vector<double>& centroids, double v) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < centroids.size(); ++c) {
        if (std::abs(v - centroids[c]) < std::abs(v - centroids[best])) best = c;
    }
    return best;
}

std::vector<double> kmeanspp_init(std::span<const double> values, std::size_t k, std::mt19937_64& rng) {
    std::vector<double> centroids;
    std::uniform_int_distribution<std::size_t> first(0, values.size() - 1);
    centroids.push_back(values[first(rng)]);
    std::vector<double> d2(values.size());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double d = values[i] - centroids[nearest(centroids, values[i])];
            d2[i] = d * d;
            total += d2[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> unit(0.0, total);
            double r = unit(rng);
            pick = values.size() - 1;
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (r < d2[i]) {
                    pick = i;
                    break;
                }
                r -= d2[i];
            }
        } else {
            pick = first(rng);
        }
        centroids.push_back(values[pick]);
    }
    return centroids;
}

ClusterResult lloyd(std::span<const double> values, std::vector<double> centroids) {
    const std::size_t k = centroids.size();
    std::vector<std::size_t> labels(values.size(), k);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const std::size_t c = nearest(centroids, values[i]);
            if (c != labels[i]) {
                labels[i] = c;
                changed = true;
            }
        }
        if (!changed) break;
        std::vector<double> sums(k, 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < values.size(); ++i) {
            sums[labels[i]] += values[i];
            ++counts[labels[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                centroids[c] = sums[c] / static_cast<double>(counts[c]);
                continue;
            }
            // Re-seed an empty cluster at the worst-fit point.
            std::size_t worst = 0;
            double worst_d = -1.0;
            for (std::size_t i = 0; i < values.size(); ++i) {
                const double d = std::abs(values[i] - centroids[labels[i]]);
                if (d > worst_d) {
                    worst_d = d;
                    worst = i;
                }
            }
            centroids[c] = values[worst];
        }
    }

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return centroids[a] < centroids[b]; });
    std::vector<std::size_t> rank(k);
    for (std::size_t r = 0; r < k; ++r) rank[order[r]] = r;

    ClusterResult result;
    result.names = cluster_names(k);
    result.sizes.assign(k, 0);
    for (std::size_t r = 0; r < k; ++r) result.centroids.push_back(centroids[order[r]]);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::size_t label = rank[labels[i]];
        result.labels.push_back(label);
        ++result.sizes[label];
        const double d = values[i] - result.centroids[label];
        result.inertia += d * d;
    }
    return result;
}

}  // namespace

ClusterResult cluster_explorers(std::span<const double> values, std::size_t k, std::uint64_t seed, int restarts) {
    if (k == 0) throw std::invalid_argument("k must be positive");
    if (values.size() < k) {
        throw std::invalid_argument("need at least " + std::to_string(k) + " values, got " +
                                    std::to_string(values.size()));
    }
    std::mt19937_64 rng(seed);
    ClusterResult best;
    bool have_best = false;
    for (int run = 0; run < std::max(1, restarts); ++run) {
        ClusterResult candidate = lloyd(values, kmeanspp_init(values, k, rng));
        if (!have_best || candidate.inertia < best.inertia) {
            best = std::move(candidate);
            have_best = true;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Permutation test

PermutationResult permutation_test(std::span<const double> group_a, std::span<const double> group_b,
                                   std::uint64_t iterations, std::uint64_t seed) {
    if (group_a.empty() || group_b.empty()) throw std::invalid_argument("permutation test needs two non-empty groups");

    PermutationResult result;
    result.observed_diff = mean(group_a) - mean(group_b);

    // Canonical orientation so swapping the groups replays the same draws.
    std::vector<double> first(group_a.begin(), group_a.end());
    std::vector<double> second(group_b.begin(), group_b.end());
    {
        std::vector<double> sa = first;
        std::vector<double> sb = second;
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        if (sa.size() > sb.size() || (sa.size() == sb.size() && sb < sa)) std::swap(first, second);
    }
    std::vector<double> pooled = first;
    pooled.insert(pooled.end(), second.begin(), second.end());
    const std::size_t n = pooled.size();
    const std::size_t na = first.size();
    const std::size_t nb = second.size();
    const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);

    double scale = 1.0;
    for (double v : pooled) scale = std::max(scale, std::abs(v));
    const double threshold = std::abs(result.observed_diff) - 1e-12 * scale;
    auto extreme = [&](double sum_a) {
        const double diff = sum_a / static_cast<double>(na) - (total - sum_a) / static_cast<double>(nb);
        return std::abs(diff) >= threshold;
    };

    const std::uint64_t assignments = binomial(n, na);
    if (assignments <= kExactPermutationLimit) {
        std::vector<std::size_t> idx(na);
        std::iota(idx.begin(), idx.end(), 0);
        std::uint64_t hits = 0;
        std::uint64_t count = 0;
        while (true) {
            double sum_a = 0.0;
            for (std::size_t i : idx) sum_a += pooled[i];
            if (extreme(sum_a)) ++hits;
            ++count;
            // Next combination in lexicographic order.
            std::size_t pos = na;
            while (pos > 0 && idx[pos - 1] == n - na + pos - 1) --pos;
            if (pos == 0) break;
            ++idx[pos - 1];
            for (std::size_t j = pos; j < na; ++j) idx[j] = idx[j - 1] + 1;
        }
        result.exact = true;
        result.assignments = count;
        result.p_value = static_cast<double>(hits) / static_cast<double>(count);
        return result;
    }

    std::mt19937_64 rng(seed);
    std::vector<double> work = pooled;
    std::uint64_t hits = 0;
    for (std::uint64_t it = 0; it < iterations; ++it) {
        double sum_a = 0.0;
        for (std::size_t i = 0; i < na; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n - 1);
            std::swap(work[i], work[pick(rng)]);
            sum_a += work[i];
        }
        if (extreme(sum_a)) ++hits;
    }
    result.exact = false;
    result.assignments = iterations;
    result.p_value = static_cast<double>(hits + 1) / static_cast<double>(iterations + 1);
    return result;
}

std::optional<double> welch_t(std::span<const double> group_a, std::span<const double> group_b) {
    if (group_a.size() < 2 || group_b.size() < 2) return std::nullopt;
    auto variance = [](std::span<const double> v) {
        const double m = mean(v);
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return ss / static_cast<double>(v.size() - 1);
    };
    const double se = std::sqrt(variance(group_a) / static_cast<double>(group_a.size()) +
                                variance(group_b) / static_cast<double>(group_b.size()));
    if (se == 0.0) return std::nullopt;
    return (mean(group_a) - mean(group_b)) / se;
}

}  // namespace explab
