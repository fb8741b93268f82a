#include "cellcast/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cellcast/error.hpp"
#include "cellcast/io.hpp"

namespace cellcast::cluster {

CorrelationMatrix make_matrix(std::vector<int> group_ids, std::vector<double> r) {
    const std::size_t n = group_ids.size();
    if (r.size() != n * n) throw ValidationError("correlation matrix: expected n*n entries");
    if (!std::is_sorted(group_ids.begin(), group_ids.end()) ||
        std::adjacent_find(group_ids.begin(), group_ids.end()) != group_ids.end()) {
        throw ValidationError("correlation matrix: group ids must be strictly ascending");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (r[i * n + i] != 1.0) throw ValidationError("correlation matrix: diagonal must be 1");
        for (std::size_t j = 0; j < n; ++j) {
            const double v = r[i * n + j];
            if (!(v >= -1.0 && v <= 1.0)) throw ValidationError("correlation matrix: entry outside [-1, 1]");
            if (v != r[j * n + i]) throw ValidationError("correlation matrix: not symmetric");
        }
    }
    return {std::move(group_ids), std::move(r)};
}

CorrelationMatrix correlation_matrix(const GroupMap& groups) {
    if (groups.size() < 2) throw ValidationError("correlation matrix needs at least 2 groups");
    CorrelationMatrix m;
    for (const auto& [id, g] : groups) m.group_ids.push_back(id);
    const std::size_t n = m.group_ids.size();
    m.r.assign(n * n, 1.0);
    std::vector<const GroupProfile*> ordered;
    for (const auto& [id, g] : groups) {
        if (g.is_constant()) throw UndefinedCorrelationError("constant profile in group " + std::to_string(id));
        ordered.push_back(&g);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = profile::pearson(*ordered[i], *ordered[j]);
            m.r[i * n + j] = r;
            m.r[j * n + i] = r;
        }
    }
    return m;
}

double within_cluster_quality(const CorrelationMatrix& matrix, const std::map<int, int>& group_to_cluster) {
    double total = 0.0;
    std::size_t pairs = 0;
    const std::size_t n = matrix.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (group_to_cluster.at(matrix.group_ids[i]) == group_to_cluster.at(matrix.group_ids[j])) {
                total += matrix.at(i, j);
                ++pairs;
            }
        }
    }
    return pairs == 0 ? 1.0 : total / static_cast<double>(pairs);
}

ClusterAssignment merge_groups(const CorrelationMatrix& matrix, int k) {
    const std::size_t n = matrix.size();
    if (k < 1 || static_cast<std::size_t>(k) > n) {
        throw UsageError("k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }
    // Members are matrix indices, kept ascending; front() is the smallest
    // group id because group_ids are ascending.
    std::vector<std::vector<std::size_t>> clusters(n);
    for (std::size_t i = 0; i < n; ++i) clusters[i] = {i};

    auto linkage = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
        double total = 0.0;
        for (auto i : a)
            for (auto j : b) total += 1.0 - matrix.at(i, j);
        return total / static_cast<double>(a.size() * b.size());
    };

    while (clusters.size() > static_cast<std::size_t>(k)) {
        // clusters stay sorted by front(), so scanning (a, b) with a < b in
        // index order visits candidate pairs lexicographically and the
        // strict comparison keeps the first of equal distances.
        std::size_t best_a = 0, best_b = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < clusters.size(); ++a) {
            for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                const double d = linkage(clusters[a], clusters[b]);
                if (d < best) {
                    best = d;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        auto& target = clusters[best_a];
        target.insert(target.end(), clusters[best_b].begin(), clusters[best_b].end());
        std::sort(target.begin(), target.end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_b));
    }

    ClusterAssignment out;
    out.k = k;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (auto i : clusters[c]) out.group_to_cluster[matrix.group_ids[i]] = static_cast<int>(c);
    }
    out.quality = within_cluster_quality(matrix, out.group_to_cluster);
    return out;
}

std::map<std::int64_t, int> assign_cells(const GroupMap& groups, const ClusterAssignment& assignment) {
    std::map<std::int64_t, int> cells;
    for (const auto& [id, g] : groups) {
        const auto it = assignment.group_to_cluster.find(id);
        if (it == assignment.group_to_cluster.end()) {
            throw ValidationError("group " + std::to_string(id) + " has no cluster");
        }
        for (auto cell : g.members) cells[cell] = it->second;
    }
    return cells;
}

ClusterAssignment cluster_groups(const GroupMap& groups, int k, const profile::SeriesMap& cells,
                                 const profile::GroupingOptions& options) {
    GroupMap regular;
    std::vector<int> constant;
    for (const auto& [id, g] : groups) {
        if (g.is_constant()) {
            constant.push_back(id);
        } else {
            regular.emplace(id, g);
        }
    }
    ClusterAssignment out = merge_groups(correlation_matrix(regular), k);

    if (!constant.empty()) {
        // Cell-weighted mean profile of every cluster.
        std::vector<std::vector<double>> cluster_profiles(static_cast<std::size_t>(k));
        std::vector<double> weights(static_cast<std::size_t>(k), 0.0);
        for (const auto& [id, g] : regular) {
            const auto c = static_cast<std::size_t>(out.group_to_cluster.at(id));
            auto& p = cluster_profiles[c];
            if (p.empty()) p.assign(g.profile.size(), 0.0);
            const auto w = static_cast<double>(g.members.size());
            for (std::size_t j = 0; j < p.size(); ++j) p[j] += w * g.profile[j];
            weights[c] += w;
        }
        for (std::size_t c = 0; c < cluster_profiles.size(); ++c) {
            for (double& v : cluster_profiles[c]) v /= weights[c];
        }

        for (int id : constant) {
            int best_cluster = 0;
            double best_score = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double total = 0.0;
                int defined = 0;
                for (auto cell : groups.at(id).members) {
                    const profile::SeriesMap single{{cell, cells.at(cell)}};
                    const auto own = profile::group_by_peak_hour(single, options).begin()->second;
                    try {
                        total += profile::pearson(own.profile, cluster_profiles[static_cast<std::size_t>(c)]);
                        ++defined;
                    } catch (const UndefinedCorrelationError&) {
                    }
                }
                if (defined > 0 && total / defined > best_score) {
                    best_score = total / defined;
                    best_cluster = c;
                }
            }
            out.group_to_cluster[id] = best_cluster;
            out.flagged_groups.push_back(id);
        }
    }
    out.cell_to_cluster = assign_cells(groups, out);
    return out;
}

std::string correlation_csv(const CorrelationMatrix& matrix) {
    std::string out = "group_i,group_j,r\n";
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        for (std::size_t j = 0; j < matrix.size(); ++j) {
            out += std::to_string(matrix.group_ids[i]) + ',' + std::to_string(matrix.group_ids[j]) + ',' +
                   io::format_double(matrix.at(i, j)) + '\n';
        }
    }
    return out;
}

std::string assignment_csv(const GroupMap& groups, const ClusterAssignment& assignment) {
    std::map<std::int64_t, int> group_of;
    for (const auto& [id, g] : groups)
        for (auto cell : g.members) group_of[cell] = id;
    std::string out = "cell_id,group_id,cluster\n";
    for (const auto& [cell, cluster] : assignment.cell_to_cluster) {
        out += std::to_string(cell) + ',' + std::to_string(group_of.at(cell)) + ',' + std::to_string(cluster) + '\n';
    }
    return out;
}

ClusterAssignment assignment_from_csv(std::string_view text) {
    ClusterAssignment out;
    out.quality = std::numeric_limits<double>::quiet_NaN();
    std::size_t line_number = 0;
    bool header = true;
    for (auto line : io::split(text, '\n')) {
        ++line_number;
        line = io::trim(line);
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line != "cell_id,group_id,cluster") throw ParseError(line_number, "unexpected assignment CSV header");
            continue;
        }
        const auto f = io::split(line, ',');
        if (f.size() != 3) throw ParseError(line_number, "expected 3 columns");
        const auto cell = io::parse_int(f[0]);
        const auto group = io::parse_int(f[1]);
        const auto cluster = io::parse_int(f[2]);
        if (!cell || !group || !cluster || *cluster < 0) throw ParseError(line_number, "malformed assignment row");
        const int g = static_cast<int>(*group);
        const int c = static_cast<int>(*cluster);
        const auto [it, inserted] = out.group_to_cluster.emplace(g, c);
        if (it->second != c) throw ValidationError("group " + std::to_string(g) + " mapped to two clusters");
        out.cell_to_cluster[*cell] = c;
        out.k = std::max(out.k, c + 1);
    }
    if (header) throw ParseError(1, "empty assignment CSV");
    return out;
}

}  // namespace cellcast::cluster
