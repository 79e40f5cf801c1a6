#include "twinforge/classifier.hpp"

#include "twinforge/dtw.hpp"
#include "twinforge/errors.hpp"

#include <doctest.h>

#include "oracles.hpp"

#include <cmath>

using namespace twinforge;

namespace {

Trajectory random_trajectory(oracles::Rng& rng, std::size_t len) {
    Trajectory t;
    for (std::size_t i = 0; i < len; ++i) t.emplace_back(rng.uniform(-3, 3), rng.uniform(-3, 3));
    return t;
}

Trajectory translated(const Trajectory& t, const Vec2& delta) {
    Trajectory out;
    out.reserve(t.size());
    for (const auto& p : t) out.push_back(p + delta);
    return out;
}

}  // namespace

TEST_CASE("dtw: distance to itself is zero") {
    oracles::Rng rng(3);
    for (int i = 0; i < 10; ++i) {
        Trajectory a = random_trajectory(rng, 1 + rng.below(12));
        CHECK(dtw_distance(a, a) == doctest::Approx(0.0));
    }
}

TEST_CASE("dtw: warping absorbs a repeated point") {
    Trajectory a = {{0, 0}, {1, 0}};
    Trajectory b = {{0, 0}, {0, 0}, {1, 0}};
    CHECK(dtw_distance(a, b) == doctest::Approx(0.0));
}

TEST_CASE("dtw: single-pair distance is the Euclidean distance") {
    CHECK(dtw_distance({{0, 0}}, {{3, 4}}) == doctest::Approx(5.0));
}

TEST_CASE("dtw: empty trajectory is an error") {
    CHECK_THROWS_AS(dtw_distance({}, {{1, 1}}), EmptyTrajectory);
    CHECK_THROWS_AS(dtw_distance({{1, 1}}, {}), EmptyTrajectory);
}

TEST_CASE("dtw: band feasibility") {
    DtwParams banded;
    banded.band_width = 1;
    Trajectory a = {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}};
    Trajectory b = {{0, 0}, {1, 0}};
    CHECK_THROWS_AS(dtw_distance(a, b, banded), InfeasibleBand);
    banded.band_width = 3;
    CHECK(dtw_distance(a, b, banded) >= 0.0);
}

TEST_CASE("dtw equals brute-force path enumeration on 200 seeded random pairs") {
    oracles::Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        Trajectory a = random_trajectory(rng, 1 + rng.below(6));
        Trajectory b = random_trajectory(rng, 1 + rng.below(6));
        double dp = dtw_distance(a, b);
        double brute = oracles::brute_force_dtw(a, b);
        CHECK(std::abs(dp - brute) <= 1e-9);
    }
}

TEST_CASE("dtw property: symmetric and nonnegative when unbanded") {
    oracles::Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        Trajectory a = random_trajectory(rng, 1 + rng.below(10));
        Trajectory b = random_trajectory(rng, 1 + rng.below(10));
        double ab = dtw_distance(a, b);
        CHECK(ab >= 0.0);
        CHECK(ab == doctest::Approx(dtw_distance(b, a)));
    }
}

TEST_CASE("dtw property: appending the shared endpoint to both sides keeps the cost") {
    oracles::Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        Trajectory a = random_trajectory(rng, 2 + rng.below(8));
        Trajectory b = random_trajectory(rng, 2 + rng.below(8));
        b.back() = a.back();  // shared endpoint
        double before = dtw_distance(a, b);
        Trajectory a2 = a, b2 = b;
        a2.push_back(a.back());
        b2.push_back(a.back());
        CHECK(dtw_distance(a2, b2) == doctest::Approx(before));
    }
}

TEST_CASE("dtw: path-length normalization divides by len(a)+len(b)") {
    DtwParams norm;
    norm.normalize_by_path_length = true;
    CHECK(dtw_distance({{0, 0}}, {{3, 4}}, norm) == doctest::Approx(2.5));
}

TEST_CASE("fit: stores one instance per training sequence") {
    std::vector<LabeledSequence> training;
    for (int i = 0; i < 4; ++i)
        training.push_back({"L" + std::to_string(i),
                            {{double(i), 0}, {double(i), 1}, {double(i), 2}},
                            "s" + std::to_string(i)});
    ClassifierMode whole{ClassifyMode::whole, 10, 1};
    auto model = NnDtwClassifier::fit(training, {}, whole);
    CHECK(model.instances().size() == 4);
}

TEST_CASE("fit: windowed mode extracts len - window + 1 windows at stride 1") {
    Trajectory long_one;
    for (int i = 0; i < 20; ++i) long_one.emplace_back(i, 0);
    auto model = NnDtwClassifier::fit({{"L", long_one, "s"}}, {}, {ClassifyMode::windowed, 10, 1});
    CHECK(extract_windows(long_one, 10, 1).size() == 11);
    ClassificationResult r = model.classify(long_one);
    CHECK(r.per_unit_labels.size() == 11);
}

TEST_CASE("fit: empty training set is an error") {
    CHECK_THROWS_AS(NnDtwClassifier::fit({}, {}, {}), EmptyTrainingSet);
}

TEST_CASE("classify: a query identical to a training sequence takes its label") {
    std::vector<LabeledSequence> training = {
        {"R1", {{0, 0}, {1, 0}, {2, 0}}, "a"},
        {"R2", {{0, 5}, {1, 5}, {2, 5}}, "b"},
    };
    auto model = NnDtwClassifier::fit(training, {}, {ClassifyMode::whole, 10, 1});
    CHECK(model.classify({{0, 5}, {1, 5}, {2, 5}}).label == "R2");
}

TEST_CASE("classify: windowed query below window_len is QueryTooShort") {
    auto model = NnDtwClassifier::fit({{"R1", {{0, 0}, {1, 0}}, "a"}}, {}, {ClassifyMode::windowed, 10, 1});
    CHECK_THROWS_AS(model.classify({{0, 0}, {1, 0}, {2, 0}}), QueryTooShort);
    CHECK_THROWS_AS(model.classify({{0, 0}}), QueryTooShort);
}

TEST_CASE("majority_smooth examples") {
    auto r = majority_smooth({"R1", "R2", "R1"});
    CHECK(r.labels == std::vector<std::string>{"R1", "R1", "R1"});
    CHECK(r.majority == "R1");
    CHECK_FALSE(r.tie);

    CHECK(majority_smooth({"R1", "R1", "R1", "R2"}).majority == "R1");

    auto single = majority_smooth({"R1"});
    CHECK(single.labels == std::vector<std::string>{"R1"});
    CHECK_FALSE(single.tie);

    auto tied = majority_smooth({"R1", "R2"});
    CHECK(tied.labels == std::vector<std::string>{"R1", "R1"});  // lexicographic tie-break
    CHECK(tied.tie);
}

TEST_CASE("classify: windowed majority decides the final label") {
    // R1 along y=0, R2 along y=5; query mostly R1-shaped.
    std::vector<LabeledSequence> training;
    Trajectory r1, r2;
    for (int i = 0; i < 12; ++i) {
        r1.emplace_back(0.1 * i, 0.0);
        r2.emplace_back(0.1 * i, 5.0);
    }
    training.push_back({"R1", r1, "a"});
    training.push_back({"R2", r2, "b"});
    auto model = NnDtwClassifier::fit(training, {}, {ClassifyMode::windowed, 4, 1});

    Trajectory query;
    for (int i = 0; i < 9; ++i) query.emplace_back(0.1 * i, 0.1);
    auto result = model.classify(query);
    CHECK(result.label == "R1");
    CHECK(result.per_unit_labels.size() == 6);
    for (const auto& l : result.per_unit_labels) CHECK(l == "R1");
}

TEST_CASE("translation equivariance: shifting everything changes no decision") {
    oracles::Rng rng(31);
    std::vector<LabeledSequence> training;
    for (int i = 0; i < 6; ++i)
        training.push_back({"L" + std::to_string(i % 3), random_trajectory(rng, 8),
                            "s" + std::to_string(i)});
    std::vector<Trajectory> queries;
    for (int i = 0; i < 10; ++i) queries.push_back(random_trajectory(rng, 8));

    const Vec2 delta(7.3, -2.1);
    std::vector<LabeledSequence> shifted_training = training;
    for (auto& seq : shifted_training) seq.trajectory = translated(seq.trajectory, delta);

    ClassifierMode mode{ClassifyMode::windowed, 4, 1};
    auto model = NnDtwClassifier::fit(training, {}, mode);
    auto shifted_model = NnDtwClassifier::fit(shifted_training, {}, mode);
    for (const auto& q : queries) {
        auto plain = model.classify(q);
        auto shifted = shifted_model.classify(translated(q, delta));
        CHECK(plain.label == shifted.label);
        CHECK(plain.per_unit_labels == shifted.per_unit_labels);
    }
}

TEST_CASE("model persistence: the JSON file is the model") {
    oracles::Rng rng(13);
    std::vector<LabeledSequence> training;
    for (int i = 0; i < 5; ++i)
        training.push_back({"L" + std::to_string(i % 2), random_trajectory(rng, 10),
                            "s" + std::to_string(i)});
    DtwParams dtw;
    dtw.band_width = 4;
    auto model = NnDtwClassifier::fit(training, dtw, {ClassifyMode::windowed, 5, 2});
    auto reloaded = NnDtwClassifier::from_json(model.to_json());
    CHECK(reloaded.instances().size() == model.instances().size());
    CHECK(reloaded.mode().window_len == 5);
    CHECK(reloaded.mode().stride == 2);
    REQUIRE(reloaded.dtw_params().band_width.has_value());
    CHECK(*reloaded.dtw_params().band_width == 4);
    for (int i = 0; i < 5; ++i) {
        Trajectory q = random_trajectory(rng, 9);
        CHECK(model.classify(q).label == reloaded.classify(q).label);
    }
    CHECK(model.to_json() == reloaded.to_json());
}
