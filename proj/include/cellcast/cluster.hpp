#pragma once

// Correlation-driven merging of peak-hour groups into K clusters.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cellcast/profile.hpp"

namespace cellcast::cluster {

using profile::GroupMap;
using profile::GroupProfile;

struct CorrelationMatrix {
    std::vector<int> group_ids;  // ascending
    std::vector<double> r;       // row-major n x n

    std::size_t size() const { return group_ids.size(); }
    double at(std::size_t i, std::size_t j) const { return r[i * group_ids.size() + j]; }
};

/// Builds a matrix from explicit values; checks shape, symmetry, unit
/// diagonal and range. Group ids must be strictly ascending.
CorrelationMatrix make_matrix(std::vector<int> group_ids, std::vector<double> r);

/// Pairwise Pearson correlation of the group profiles. Needs at least two
/// groups; a constant profile raises UndefinedCorrelationError naming it.
CorrelationMatrix correlation_matrix(const GroupMap& groups);

struct ClusterAssignment {
    int k = 0;
    std::map<int, int> group_to_cluster;
    std::map<std::int64_t, int> cell_to_cluster;
    /// Mean r over all within-cluster group pairs; 1.0 when no pair exists.
    double quality = 1.0;
    /// Constant-profile groups placed by member correlation instead of linkage.
    std::vector<int> flagged_groups;
};

/// Average-linkage agglomeration on d = 1 - r down to k clusters. Equal
/// distances merge the pair with the lexicographically smallest
/// (smallest group id of each side). Cluster indices follow ascending
/// smallest group id. cell_to_cluster is left empty.
ClusterAssignment merge_groups(const CorrelationMatrix& matrix, int k);

/// Each member cell inherits its group's cluster.
std::map<std::int64_t, int> assign_cells(const GroupMap& groups, const ClusterAssignment& assignment);

/// Full second clustering step over the output of group_by_peak_hour.
/// Constant-profile groups are left out of the matrix and then attached to
/// the cluster whose cell-weighted mean profile correlates best, on
/// average, with their members' own profiles (computed from `cells` with
/// the same options). They are listed in flagged_groups.
ClusterAssignment cluster_groups(const GroupMap& groups, int k, const profile::SeriesMap& cells,
                                 const profile::GroupingOptions& options = {});

/// Mean within-cluster pairwise r for a given group -> cluster map.
double within_cluster_quality(const CorrelationMatrix& matrix, const std::map<int, int>& group_to_cluster);

/// `group_i,group_j,r` for every ordered pair.
std::string correlation_csv(const CorrelationMatrix& matrix);
/// `cell_id,group_id,cluster`
std::string assignment_csv(const GroupMap& groups, const ClusterAssignment& assignment);
/// Inverse of assignment_csv; quality is not stored and reads back as NaN.
ClusterAssignment assignment_from_csv(std::string_view text);

}  // namespace cellcast::cluster
