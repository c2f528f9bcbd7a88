#include "doctest.h"

#include <cmath>
#include <vector>

#include "entrain/entrainment.hpp"
#include "entrain/prng.hpp"

using namespace entrain;

namespace {

features::TurnFeatureSummary summary_of(int index, const corpus::SpeakerId& speaker,
                                        double value) {
    features::TurnFeatureSummary s;
    s.turn_index = index;
    s.speaker = speaker;
    s.f0 = features::Stat3{value, value, value};
    s.intensity = features::Stat3{value, value, value};
    return s;
}

std::vector<features::TurnFeatureSummary> alternating(const std::vector<double>& values) {
    std::vector<features::TurnFeatureSummary> out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out.push_back(summary_of(static_cast<int>(i), i % 2 ? "B" : "A", values[i]));
    return out;
}

corpus::FauTrack fau_from(const std::vector<double>& values, double fps = 30.0) {
    corpus::FauTrack t;
    t.speaker = "X";
    t.frame_rate_hz = fps;
    for (std::size_t i = 0; i < values.size(); ++i) {
        t.timestamps_s.push_back(static_cast<double>(i) / fps);
        t.valid.push_back(1);
    }
    for (const char* au : corpus::kAuIds)
        t.channels[au] = values;
    return t;
}

} // namespace

// ---------------------------------------------------------------------------
// adjacent distances
// ---------------------------------------------------------------------------

TEST_CASE("adjacent: direct formula on the 3-turn chain") {
    const auto s = alternating({5, 9, 4});
    const auto d = metrics::adjacent_distance(s, metrics::AcousticFeature::f0,
                                              metrics::TurnStatKind::mean);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == doctest::Approx(4.0));
    CHECK(d[1] == doctest::Approx(5.0));
}

TEST_CASE("adjacent: equal neighbours give zero and gaps are skipped") {
    auto s = alternating({200, 200, 210});
    const auto d = metrics::adjacent_distance(s, metrics::AcousticFeature::f0,
                                              metrics::TurnStatKind::mean);
    CHECK(d[0] == doctest::Approx(0.0));
    s[1].f0.reset();  // undefined summary drops both adjacent pairs
    std::vector<int> kept;
    const auto d2 = metrics::adjacent_distance(s, metrics::AcousticFeature::f0,
                                               metrics::TurnStatKind::mean, &kept);
    CHECK(d2.empty());
    CHECK(kept.empty());
}

// ---------------------------------------------------------------------------
// non-adjacent baseline
// ---------------------------------------------------------------------------

TEST_CASE("baseline: constant partner values make the draws irrelevant") {
    std::vector<double> values;
    for (int i = 0; i < 12; ++i) values.push_back(i % 2 ? 210.0 : 200.0);
    const auto s = alternating(values);
    auto stream = rng::derive_stream(42, {"t"});
    const double b = metrics::nonadjacent_baseline(s, metrics::AcousticFeature::f0,
                                                   metrics::TurnStatKind::mean, 0, stream);
    CHECK(b == doctest::Approx(10.0));
}

TEST_CASE("baseline: with-replacement mean stays within the pool hull") {
    // current turn value 0; partner pool {1, 3}
    std::vector<features::TurnFeatureSummary> s;
    s.push_back(summary_of(0, "A", 0.0));
    s.push_back(summary_of(1, "B", 5.0));   // adjacent, excluded from draws
    s.push_back(summary_of(2, "A", 0.0));
    s.push_back(summary_of(3, "B", 1.0));
    s.push_back(summary_of(4, "A", 0.0));
    s.push_back(summary_of(5, "B", 3.0));
    auto stream = rng::derive_stream(7, {"t"});
    const double b = metrics::nonadjacent_baseline(s, metrics::AcousticFeature::f0,
                                                   metrics::TurnStatKind::mean, 0, stream);
    CHECK(b >= 1.0);
    CHECK(b <= 3.0);
}

TEST_CASE("baseline: seeded re-execution reproduces the draw set") {
    // 23 turns: partner pool for turn 0 has 11 values {2,4,...,22}
    std::vector<features::TurnFeatureSummary> s;
    s.push_back(summary_of(0, "A", 0.0));
    for (int i = 1; i <= 22; ++i)
        s.push_back(summary_of(i, i % 2 ? "B" : "A",
                               i % 2 ? static_cast<double>(i + 1) : 0.0));
    std::vector<double> draws1, draws2;
    auto s1 = rng::derive_stream(99, {"conv", "turn0"});
    auto s2 = rng::derive_stream(99, {"conv", "turn0"});
    const double b1 = metrics::nonadjacent_baseline(s, metrics::AcousticFeature::f0,
                                                    metrics::TurnStatKind::mean, 0, s1,
                                                    10, &draws1);
    const double b2 = metrics::nonadjacent_baseline(s, metrics::AcousticFeature::f0,
                                                    metrics::TurnStatKind::mean, 0, s2,
                                                    10, &draws2);
    CHECK(b1 == b2);
    REQUIRE(draws1.size() == 10);
    CHECK(draws1 == draws2);
    // without replacement: all draws distinct, and the mean matches them
    for (std::size_t i = 0; i < draws1.size(); ++i)
        for (std::size_t j = i + 1; j < draws1.size(); ++j)
            CHECK(draws1[i] != draws1[j]);
    double mean = 0.0;
    for (double d : draws1) mean += d;
    CHECK(b1 == doctest::Approx(mean / 10.0).epsilon(1e-15));
}

TEST_CASE("baseline: fewer than two partner turns is an error") {
    std::vector<features::TurnFeatureSummary> s;
    s.push_back(summary_of(0, "A", 0.0));
    s.push_back(summary_of(1, "B", 1.0));
    auto stream = rng::derive_stream(1, {"t"});
    try {
        (void)metrics::nonadjacent_baseline(s, metrics::AcousticFeature::f0,
                                            metrics::TurnStatKind::mean, 0, stream);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientPartnerTurns);
    }
}

// ---------------------------------------------------------------------------
// proximity distances + effect
// ---------------------------------------------------------------------------

TEST_CASE("proximity: identical seeds give bit-identical distances") {
    auto stream = rng::Xoshiro256(17);
    std::vector<double> values(25);
    for (auto& v : values) v = stream.normal();
    const auto s = alternating(values);
    const auto d1 = metrics::proximity_distances(s, metrics::AcousticFeature::f0,
                                                 metrics::TurnStatKind::mean, 123, "c1");
    const auto d2 = metrics::proximity_distances(s, metrics::AcousticFeature::f0,
                                                 metrics::TurnStatKind::mean, 123, "c1");
    CHECK(d1.adjacent == d2.adjacent);
    CHECK(d1.nonadjacent == d2.nonadjacent);
    CHECK(d1.nonadjacent_draws == d2.nonadjacent_draws);
    const auto d3 = metrics::proximity_distances(s, metrics::AcousticFeature::f0,
                                                 metrics::TurnStatKind::mean, 124, "c1");
    CHECK(d1.nonadjacent != d3.nonadjacent);
}

TEST_CASE("proximity effect: identical sequences flag zero variance, delta 0") {
    metrics::ProximityDistances d;
    d.adjacent = {1, 2, 3, 4, 5};
    d.nonadjacent = d.adjacent;
    const auto e = metrics::proximity_effect(d);
    CHECK(e.zero_variance_differences);
    CHECK(!e.t_stat.has_value());
    CHECK(e.cliffs_delta == doctest::Approx(0.0));
    CHECK(e.n_pairs == 5);
}

TEST_CASE("proximity effect: complete dominance gives delta -1") {
    metrics::ProximityDistances d;
    d.adjacent = {1, 1, 1, 1, 1};
    d.nonadjacent = {2, 2, 2, 2, 2};
    const auto e = metrics::proximity_effect(d);
    CHECK(e.cliffs_delta == doctest::Approx(-1.0));
    CHECK(e.zero_variance_differences);  // differences all -1
}

TEST_CASE("proximity effect: sign convention on strictly smaller adjacents") {
    auto stream = rng::Xoshiro256(6);
    metrics::ProximityDistances d;
    for (int i = 0; i < 20; ++i) {
        d.adjacent.push_back(stream.uniform01());            // < 1
        d.nonadjacent.push_back(1.5 + stream.uniform01());   // > 1.5
        for (int k = 0; k < 10; ++k)
            d.nonadjacent_draws.push_back(1.5 + stream.uniform01());
    }
    const auto e = metrics::proximity_effect(d);
    CHECK(e.cliffs_delta == doctest::Approx(-1.0));
    CHECK(e.t_stat.value() < 0.0);
    CHECK(e.p.value() < 1e-6);
}

TEST_CASE("proximity effect: too few pairs throws") {
    metrics::ProximityDistances d;
    d.adjacent = {1, 2};
    d.nonadjacent = {1, 2};
    CHECK_THROWS_AS((void)metrics::proximity_effect(d), Error);
}

// ---------------------------------------------------------------------------
// windowed synchrony
// ---------------------------------------------------------------------------

TEST_CASE("synchrony: identical non-constant tracks clamp at atanh(1 - 1e-6)") {
    auto stream = rng::Xoshiro256(10);
    std::vector<double> v(901);  // 30 s inclusive at 30 fps
    for (auto& x : v) x = 2.0 + stream.uniform01();
    const auto a = fau_from(v);
    const auto e = metrics::windowed_synchrony(a, a, "AU06");
    CHECK(e.mean_z == doctest::Approx(std::atanh(1.0 - 1e-6)).epsilon(1e-9));
    CHECK(e.mean_z == doctest::Approx(7.254).epsilon(1e-3));
    CHECK(e.n_windows == 6);
}

TEST_CASE("synchrony: anti-correlated tracks mirror the clamp") {
    auto stream = rng::Xoshiro256(11);
    std::vector<double> v(901), w(901);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = 2.0 + stream.uniform01();
        w[i] = 5.0 - v[i];  // exact negative correlation, still >= 0
    }
    const auto e = metrics::windowed_synchrony(fau_from(v), fau_from(w), "AU12");
    CHECK(e.mean_z == doctest::Approx(-std::atanh(1.0 - 1e-6)).epsilon(1e-9));
}

TEST_CASE("synchrony: symmetric in the two tracks, exactly") {
    auto stream = rng::Xoshiro256(12);
    std::vector<double> v(1500), w(1500);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = 2.0 + 0.5 * stream.normal();
        w[i] = 2.0 + 0.5 * stream.normal() + 0.3 * v[i];
    }
    const auto ab = metrics::windowed_synchrony(fau_from(v), fau_from(w), "AU01");
    const auto ba = metrics::windowed_synchrony(fau_from(w), fau_from(v), "AU01");
    CHECK(ab.mean_z == ba.mean_z);
    CHECK(ab.n_windows == ba.n_windows);
}

TEST_CASE("synchrony: invariant under positive affine maps of one track") {
    auto stream = rng::Xoshiro256(13);
    std::vector<double> v(1500), w(1500);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = 2.0 + 0.5 * stream.normal();
        w[i] = 2.0 + 0.4 * stream.normal() + 0.5 * v[i];
    }
    std::vector<double> w2(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) w2[i] = 3.7 * w[i] + 11.0;
    const auto base = metrics::windowed_synchrony(fau_from(v), fau_from(w), "AU02");
    const auto mapped = metrics::windowed_synchrony(fau_from(v), fau_from(w2), "AU02");
    CHECK(std::fabs(base.mean_z - mapped.mean_z) < 1e-9);
    CHECK(base.n_windows == mapped.n_windows);
}

TEST_CASE("synchrony: independent noise over many windows stays near zero") {
    auto sa = rng::Xoshiro256(140);
    auto sb = rng::Xoshiro256(141);
    const std::size_t n = 360 * 150 + 1;  // 360 complete windows of 5 s at 30 fps
    std::vector<double> v(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = 2.0 + 0.5 * sa.normal();
        w[i] = 2.0 + 0.5 * sb.normal();
    }
    const auto e = metrics::windowed_synchrony(fau_from(v), fau_from(w), "AU04");
    CHECK(e.n_windows == 360);
    CHECK(std::fabs(e.mean_z) < 0.05);
}

TEST_CASE("synchrony: invalid frames thin windows; constant tracks unusable") {
    auto stream = rng::Xoshiro256(15);
    std::vector<double> v(601);  // 20 s inclusive -> 4 complete windows
    for (auto& x : v) x = 2.0 + stream.uniform01();
    auto a = fau_from(v);
    auto b = fau_from(v);
    // invalidate everything in the first window of b
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.timestamps_s[i] < 5.0) b.valid[i] = 0;
    const auto e = metrics::windowed_synchrony(a, b, "AU06");
    CHECK(e.n_windows == 3);  // the first window is gone

    const auto c = fau_from(std::vector<double>(601, 1.5));
    CHECK_THROWS_AS((void)metrics::windowed_synchrony(c, c, "AU06"), Error);
}

TEST_CASE("synchrony: all 17 AUs reported") {
    auto stream = rng::Xoshiro256(16);
    std::vector<double> v(600), w(600);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = 2.0 + 0.5 * stream.normal();
        w[i] = 2.0 + 0.5 * stream.normal();
    }
    const auto all = metrics::synchrony_all_aus(fau_from(v), fau_from(w));
    CHECK(all.size() == corpus::kAuIds.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        CHECK(all[i].au == corpus::kAuIds[i]);
}

TEST_CASE("synchrony: nonpositive window is invalid") {
    auto stream = rng::Xoshiro256(77);
    std::vector<double> v(200);
    for (auto& x : v) x = 2.0 + stream.uniform01();
    const auto a = fau_from(v);
    CHECK_THROWS_AS((void)metrics::windowed_synchrony(a, a, "AU06", 0.001), Error);
}
