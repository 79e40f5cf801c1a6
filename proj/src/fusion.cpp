#include "twinforge/fusion.hpp"

#include "twinforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace twinforge {

namespace {

std::vector<SignalTransition> all_transitions(const SignalSeries& signals) {
    std::map<std::string, const SignalSample*> last_seen;
    std::vector<SignalTransition> transitions;
    for (const auto& s : signals) {
        auto [it, inserted] = last_seen.emplace(s.signal_name, &s);
        if (!inserted) {
            if (it->second->value != s.value)
                transitions.push_back({s.signal_name, s.t, it->second->value, s.value});
            it->second = &s;
        }
    }
    std::stable_sort(transitions.begin(), transitions.end(),
                     [](const SignalTransition& a, const SignalTransition& b) { return a.t < b.t; });
    return transitions;
}

Vec3 centroid_of(const std::vector<Vec3>& points, const std::vector<std::size_t>& members) {
    Vec3 c = Vec3::Zero();
    for (std::size_t i : members) c += points[i];
    return c / static_cast<double>(members.size());
}

double rms_dispersion(const std::vector<Vec3>& points, const std::vector<std::size_t>& members,
                      const Vec3& centroid) {
    double sum = 0.0;
    for (std::size_t i : members) sum += (points[i] - centroid).squaredNorm();
    return std::sqrt(sum / static_cast<double>(members.size()));
}

}  // namespace

std::vector<SignalTransition> find_transitions(const SignalSeries& signals, const Subsequence& sub,
                                               TimestampMs slack) {
    std::vector<SignalTransition> in_window;
    for (const auto& tr : all_transitions(signals))
        if (tr.t >= sub.t_start - slack && tr.t <= sub.t_end + slack) in_window.push_back(tr);
    return in_window;
}

Vec3 position_at(const Subsequence& sub, TimestampMs t) {
    if (sub.samples.empty() || t < sub.t_start || t > sub.t_end)
        throw OutOfSpan("t=" + std::to_string(t) + " outside subsequence [" +
                        std::to_string(sub.t_start) + ", " + std::to_string(sub.t_end) + "]");
    // First sample with time >= t.
    auto it = std::lower_bound(sub.samples.begin(), sub.samples.end(), t,
                               [](const PositionSample& s, TimestampMs value) { return s.t < value; });
    if (it->t == t) return it->pos;
    const PositionSample& hi = *it;
    const PositionSample& lo = *std::prev(it);
    if (hi.t == lo.t) return lo.pos;
    double f = static_cast<double>(t - lo.t) / static_cast<double>(hi.t - lo.t);
    return lo.pos + f * (hi.pos - lo.pos);
}

ObservationSet collect_observations(const SignalSeries& signals,
                                    const std::vector<Subsequence>& subsequences,
                                    const std::map<std::string, std::string>& labels_by_subsequence,
                                    const FusionParams& params) {
    ObservationSet result;
    const auto transitions = all_transitions(signals);
    std::vector<bool> covered(transitions.size(), false);

    for (const auto& sub : subsequences) {
        auto label = labels_by_subsequence.find(sub.id);
        for (std::size_t i = 0; i < transitions.size(); ++i) {
            const auto& tr = transitions[i];
            if (tr.t < sub.t_start - params.window_slack_ms ||
                tr.t > sub.t_end + params.window_slack_ms)
                continue;
            covered[i] = true;
            TransitionObservation obs;
            obs.transition = tr;
            // Slack can admit transitions just outside the sampled span;
            // interpolation clamps to it.
            obs.position = position_at(sub, std::clamp(tr.t, sub.t_start, sub.t_end));
            obs.subsequence_id = sub.id;
            if (label != labels_by_subsequence.end()) obs.group = label->second;
            result.observations.push_back(std::move(obs));
        }
    }
    result.dropped_transitions =
        static_cast<std::size_t>(std::count(covered.begin(), covered.end(), false));
    std::stable_sort(result.observations.begin(), result.observations.end(),
                     [](const TransitionObservation& a, const TransitionObservation& b) {
                         return a.transition.t < b.transition.t;
                     });
    return result;
}

std::vector<std::vector<std::size_t>> single_linkage_clusters(const std::vector<Vec3>& points,
                                                              double radius) {
    const std::size_t n = points.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if ((points[i] - points[j]).norm() <= radius) parent[find(i)] = find(j);

    std::map<std::size_t, std::vector<std::size_t>> by_root;
    for (std::size_t i = 0; i < n; ++i) by_root[find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> clusters;
    clusters.reserve(by_root.size());
    for (auto& [root, members] : by_root) clusters.push_back(std::move(members));
    std::sort(clusters.begin(), clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return clusters;
}

SensorEstimate estimate_sensor_position(const std::string& signal_name,
                                        const std::vector<TransitionObservation>& observations,
                                        const FusionParams& params,
                                        std::vector<std::size_t>* kept_indices) {
    if (observations.empty())
        throw InsufficientSupport("no observations for signal '" + signal_name + "'");

    std::vector<Vec3> points;
    points.reserve(observations.size());
    for (const auto& obs : observations) points.push_back(obs.position);

    auto clusters = single_linkage_clusters(points, params.cluster_radius);

    // Largest cluster; ties by smallest RMS dispersion, then by smallest
    // centroid in lexicographic order.
    const std::vector<std::size_t>* winner = nullptr;
    double winner_rms = 0.0;
    Vec3 winner_centroid = Vec3::Zero();
    for (const auto& cluster : clusters) {
        Vec3 c = centroid_of(points, cluster);
        double rms = rms_dispersion(points, cluster, c);
        bool take = false;
        if (winner == nullptr || cluster.size() > winner->size()) {
            take = true;
        } else if (cluster.size() == winner->size()) {
            if (rms < winner_rms) {
                take = true;
            } else if (rms == winner_rms) {
                take = std::lexicographical_compare(c.data(), c.data() + 3, winner_centroid.data(),
                                                    winner_centroid.data() + 3);
            }
        }
        if (take) {
            winner = &cluster;
            winner_rms = rms;
            winner_centroid = c;
        }
    }

    SensorEstimate estimate;
    estimate.signal_name = signal_name;

    // One outlier pass: a point is an outlier when its centroid distance
    // deviates from the mean distance by more than k × stddev (population
    // stats, so duplicating every observation changes nothing). Recompute
    // the centroid once afterwards.
    std::vector<std::size_t> kept = *winner;
    if (kept.size() >= 2) {
        std::vector<double> dist(kept.size());
        double mean = 0.0;
        for (std::size_t i = 0; i < kept.size(); ++i) {
            dist[i] = (points[kept[i]] - winner_centroid).norm();
            mean += dist[i];
        }
        mean /= static_cast<double>(kept.size());
        double var = 0.0;
        for (double d : dist) var += (d - mean) * (d - mean);
        double limit = params.outlier_k * std::sqrt(var / static_cast<double>(kept.size()));

        std::vector<std::size_t> survivors;
        for (std::size_t i = 0; i < kept.size(); ++i)
            if (std::abs(dist[i] - mean) <= limit) survivors.push_back(kept[i]);
        if (survivors.empty()) {
            estimate.outlier_removal_skipped = true;  // removal may not empty the cluster
        } else {
            kept = std::move(survivors);
        }
    }

    estimate.support = kept.size();
    estimate.discarded = points.size() - kept.size();
    estimate.position = centroid_of(points, kept);
    estimate.dispersion = rms_dispersion(points, kept, estimate.position);
    if (estimate.support < params.min_support)
        throw InsufficientSupport("signal '" + signal_name + "' has support " +
                                  std::to_string(estimate.support) + " < min_support " +
                                  std::to_string(params.min_support));
    if (kept_indices != nullptr) *kept_indices = kept;
    return estimate;
}

std::map<std::string, GroupAssignment> assign_signals_to_groups(
    const std::vector<TransitionObservation>& observations) {
    std::map<std::string, std::map<std::string, std::size_t>> votes;
    for (const auto& obs : observations)
        if (obs.group) ++votes[obs.transition.signal_name][*obs.group];

    std::map<std::string, GroupAssignment> assignments;
    for (const auto& [signal, counts] : votes) {
        std::size_t best = 0;
        for (const auto& [group, count] : counts) best = std::max(best, count);
        GroupAssignment a;
        std::size_t winners = 0;
        for (const auto& [group, count] : counts) {
            if (count != best) continue;
            ++winners;
            if (a.group.empty()) a.group = group;  // lexicographically smallest
        }
        a.tie = winners > 1;
        assignments.emplace(signal, std::move(a));
    }
    return assignments;
}

}  // namespace twinforge
