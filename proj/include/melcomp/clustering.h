// Agglomerative hierarchical clustering with Ward linkage.

#pragma once

#include <cstddef>
#include <vector>

namespace melcomp {

/// Merges the pair whose union least increases the within-cluster sum of
/// squares until `clusters` groups remain (at most the number of points).
/// Equal merge costs are resolved by the lowest (i, j) slot pair, where a
/// merged cluster keeps the lower slot.
///
/// Returns one label per point. Labels are 0..k-1, numbered in order of
/// each cluster's lowest member index.
std::vector<std::size_t> ward_cluster(const std::vector<std::vector<double>>& points, std::size_t clusters);

}  // namespace melcomp
