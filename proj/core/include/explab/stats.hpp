#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace explab {

struct ClusterResult {
    /// Ascending.
    std::vector<double> centroids;
    /// Index into `centroids` for each input value.
    std::vector<std::size_t> labels;
    /// "low", "medium", "high" for k = 3; see cluster_names.
    std::vector<std::string> names;
    std::vector<std::size_t> sizes;
    double inertia = 0.0;
};

std::vector<std::string> cluster_names(std::size_t k);

/// One-dimensional k-means (Lloyd) with seeded k-means++ starts; the best of
/// `restarts` runs by inertia wins. Throws std::invalid_argument if
/// values.size() < k or k == 0.
ClusterResult cluster_explorers(std::span<const double> values, std::size_t k = 3, std::uint64_t seed = 0,
                                int restarts = 10);

struct PermutationResult {
    double p_value = 1.0;
    double observed_diff = 0.0;
    bool exact = false;
    /// Label assignments evaluated (all of them when exact).
    std::uint64_t assignments = 0;
};

/// Enumeration is used at or below this many label assignments.
inline constexpr std::uint64_t kExactPermutationLimit = 100000;

/// Two-sided permutation test on the difference of means. Exact when the
/// number of assignments is within kExactPermutationLimit, otherwise Monte
/// Carlo with p = (hits + 1) / (iterations + 1). Throws std::invalid_argument
/// on an empty group.
PermutationResult permutation_test(std::span<const double> group_a, std::span<const double> group_b,
                                   std::uint64_t iterations = 10000, std::uint64_t seed = 0);

/// Welch's t statistic; nullopt when either group has fewer than two values
/// or the pooled standard error is zero.
std::optional<double> welch_t(std::span<const double> group_a, std::span<const double> group_b);

double mean(std::span<const double> values);
double median(std::vector<double> values);

/// n choose k, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

}  // namespace explab
