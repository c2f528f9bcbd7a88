#include "doctest.h"

#include <vector>

#include "entrain/prng.hpp"
#include "entrain/turns.hpp"

using namespace entrain;

namespace {

/// Alternating transcript with the given turn durations and the gaps
/// between consecutive turns.
corpus::Transcript make_transcript(const std::vector<double>& durations,
                                   const std::vector<double>& gaps) {
    corpus::Transcript t;
    double clock = 0.0;
    for (std::size_t i = 0; i < durations.size(); ++i) {
        corpus::Turn turn;
        turn.speaker = (i % 2 == 0) ? "A" : "B";
        turn.start_s = clock;
        turn.end_s = clock + durations[i];
        clock = turn.end_s + (i < gaps.size() ? gaps[i] : 0.0);
        t.turns.push_back(turn);
    }
    return t;
}

} // namespace

TEST_CASE("turn stats: [2,3,5] durations") {
    const auto t = make_transcript({2, 3, 5}, {0.2, 0.3});
    const auto s = turns::turn_stats(t);
    CHECK(s.min_s == doctest::Approx(2.0));
    CHECK(s.max_s == doctest::Approx(5.0));
    CHECK(s.mean_s == doctest::Approx(10.0 / 3.0));
    CHECK(s.total_s == doctest::Approx(10.0));
    CHECK(s.count == 3);
}

TEST_CASE("turn stats: singleton") {
    const auto s = turns::turn_stats(make_transcript({4}, {}));
    CHECK(s.min_s == doctest::Approx(4.0));
    CHECK(s.max_s == doctest::Approx(4.0));
    CHECK(s.mean_s == doctest::Approx(4.0));
    CHECK(s.total_s == doctest::Approx(4.0));
    CHECK(s.count == 1);
}

TEST_CASE("turn stats: empty transcript throws") {
    corpus::Transcript t;
    CHECK_THROWS_AS((void)turns::turn_stats(t), Error);
    CHECK_THROWS_AS((void)turns::pause_stats(t), Error);
}

TEST_CASE("pause stats: 0.6 s rule on the hand-computed gap set") {
    const auto t = make_transcript({1, 1, 1, 1}, {0.4, 1.0, 0.8});
    const auto s = turns::pause_stats(t);
    CHECK(s.count == 2);
    CHECK(s.min_s == doctest::Approx(0.8));
    CHECK(s.max_s == doctest::Approx(1.0));
    CHECK(s.mean_s == doctest::Approx(0.9));
    CHECK(s.total_s == doctest::Approx(1.8));
}

TEST_CASE("pause stats: nothing over threshold gives zero stats") {
    const auto s = turns::pause_stats(make_transcript({1, 1, 1}, {0.1, 0.2}));
    CHECK(s.count == 0);
    CHECK(s.min_s == 0.0);
    CHECK(s.max_s == 0.0);
    CHECK(s.mean_s == 0.0);
    CHECK(s.total_s == 0.0);
}

TEST_CASE("pause stats: overlap (negative gap) never counts") {
    const auto t = make_transcript({1, 1, 1}, {-0.2, 0.9});
    const auto s = turns::pause_stats(t);
    CHECK(s.count == 1);
    CHECK(s.min_s == doctest::Approx(0.9));
}

TEST_CASE("pause properties: count bound, threshold monotonicity, scaling") {
    auto stream = rng::Xoshiro256(2718);
    for (int trial = 0; trial < 50; ++trial) {
        // validated transcripts never overlap, so gaps are non-negative here
        const std::size_t n = 2 + stream.bounded(30);
        std::vector<double> durations(n), gaps(n - 1);
        for (auto& d : durations) d = 0.3 + 2.0 * stream.uniform01();
        for (auto& g : gaps) g = stream.uniform(0.0, 2.0);
        const auto t = make_transcript(durations, gaps);

        const auto s = turns::pause_stats(t);
        CHECK(s.count <= t.turns.size() - 1);

        // raising the threshold never increases count or total
        std::size_t prev_count = s.count;
        double prev_total = s.total_s;
        for (double thr : {0.8, 1.0, 1.4, 2.0}) {
            const auto s2 = turns::pause_stats(t, thr);
            CHECK(s2.count <= prev_count);
            CHECK(s2.total_s <= prev_total + 1e-12);
            if (s2.count > 0) CHECK(s2.min_s > thr);
            prev_count = s2.count;
            prev_total = s2.total_s;
        }

        // turn total bounded by conversation span
        const auto ts = turns::turn_stats(t);
        CHECK(ts.total_s <= t.turns.back().end_s - t.turns.front().start_s + 1e-12);

        // doubling all timestamps doubles every duration statistic
        corpus::Transcript doubled = t;
        for (auto& turn : doubled.turns) {
            turn.start_s *= 2.0;
            turn.end_s *= 2.0;
        }
        const auto td = turns::turn_stats(doubled);
        CHECK(td.min_s == doctest::Approx(2.0 * ts.min_s).epsilon(1e-12));
        CHECK(td.max_s == doctest::Approx(2.0 * ts.max_s).epsilon(1e-12));
        CHECK(td.mean_s == doctest::Approx(2.0 * ts.mean_s).epsilon(1e-12));
        CHECK(td.total_s == doctest::Approx(2.0 * ts.total_s).epsilon(1e-12));
        const auto sd = turns::pause_stats(doubled, 2.0 * turns::kDefaultPauseThresholdS);
        CHECK(sd.count == s.count);
        if (s.count > 0) {
            CHECK(sd.min_s == doctest::Approx(2.0 * s.min_s).epsilon(1e-12));
            CHECK(sd.total_s == doctest::Approx(2.0 * s.total_s).epsilon(1e-12));
        }
    }
}

TEST_CASE("pause stats: a gap exactly at the threshold does not count") {
    // 0.5 and 1.5 are exactly representable, so the first gap is exactly
    // the threshold and the rule `gap > threshold` must exclude it
    corpus::Transcript t;
    t.turns.push_back(corpus::Turn{"A", 0.0, 1.0, ""});
    t.turns.push_back(corpus::Turn{"B", 1.5, 2.5, ""});
    t.turns.push_back(corpus::Turn{"A", 3.25, 4.0, ""});
    const auto s = turns::pause_stats(t, 0.5);
    CHECK(s.count == 1);
    CHECK(s.min_s == doctest::Approx(0.75));
}
