#include "doctest.h"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "entrain/corpus.hpp"
#include "entrain/prng.hpp"

using namespace entrain;

namespace {

/// In-memory WAVE builder for loader tests (any rate/channels, PCM16 or
/// float32).
std::vector<unsigned char> make_wav(const std::vector<float>& interleaved, int rate,
                                    int channels, bool float32) {
    std::vector<unsigned char> b;
    auto u32 = [&](std::uint32_t v) {
        b.push_back(v & 0xff);
        b.push_back((v >> 8) & 0xff);
        b.push_back((v >> 16) & 0xff);
        b.push_back((v >> 24) & 0xff);
    };
    auto u16 = [&](std::uint16_t v) {
        b.push_back(v & 0xff);
        b.push_back((v >> 8) & 0xff);
    };
    auto tag = [&](const char* t) { b.insert(b.end(), t, t + 4); };
    const int bytes_per = float32 ? 4 : 2;
    const std::uint32_t data_size = static_cast<std::uint32_t>(interleaved.size() * bytes_per);
    tag("RIFF");
    u32(36 + data_size);
    tag("WAVE");
    tag("fmt ");
    u32(16);
    u16(float32 ? 3 : 1);
    u16(static_cast<std::uint16_t>(channels));
    u32(static_cast<std::uint32_t>(rate));
    u32(static_cast<std::uint32_t>(rate * channels * bytes_per));
    u16(static_cast<std::uint16_t>(channels * bytes_per));
    u16(static_cast<std::uint16_t>(8 * bytes_per));
    tag("data");
    u32(data_size);
    for (float s : interleaved) {
        if (float32) {
            std::uint32_t u;
            std::memcpy(&u, &s, 4);
            u32(u);
        } else {
            const auto v = static_cast<std::int16_t>(std::lrintf(
                std::fmin(1.0f, std::fmax(-1.0f, s)) * 32767.0f));
            u16(static_cast<std::uint16_t>(v));
        }
    }
    return b;
}

/// Single-bin DFT magnitude at freq_hz for the spectral oracle.
double dft_magnitude(const std::vector<float>& x, double freq_hz, double fs) {
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double w = 2.0 * 3.14159265358979323846 * freq_hz * n / fs;
        re += x[n] * std::cos(w);
        im -= x[n] * std::sin(w);
    }
    return std::sqrt(re * re + im * im);
}

} // namespace

// ---------------------------------------------------------------------------
// transcripts
// ---------------------------------------------------------------------------

TEST_CASE("transcript: two clean rows") {
    const std::string csv =
        "turn_id,speaker,start,stop,utterance\n"
        "0,A,0.000,2.000,hello there\n"
        "1,B,2.400,5.400,hi\n";
    const auto t = corpus::parse_transcript(csv);
    REQUIRE(t.turns.size() == 2);
    CHECK(t.turns[0].duration() == doctest::Approx(2.0));
    CHECK(t.turns[1].duration() == doctest::Approx(3.0));
    CHECK(t.turns[0].speaker == "A");
    CHECK(t.turns[1].text == "hi");
}

TEST_CASE("transcript: adjacent same-speaker rows merge into one turn") {
    const std::string csv =
        "turn_id,speaker,start,stop,utterance\n"
        "0,A,0.000,2.000,first\n"
        "1,A,2.100,3.000,second\n"
        "2,B,3.500,4.000,reply\n";
    const auto t = corpus::parse_transcript(csv);
    REQUIRE(t.turns.size() == 2);
    CHECK(t.turns[0].speaker == "A");
    CHECK(t.turns[0].start_s == doctest::Approx(0.0));
    CHECK(t.turns[0].end_s == doctest::Approx(3.0));
    CHECK(t.turns[0].text == "first second");
    CHECK(t.turns[1].start_s == doctest::Approx(3.5));
}

TEST_CASE("transcript: invalid span rejected") {
    const std::string csv =
        "turn_id,speaker,start,stop,utterance\n"
        "0,A,0.0,2.0,x\n"
        "1,B,1.0,0.5,y\n";
    CHECK_THROWS_AS((void)corpus::parse_transcript(csv), Error);
}

TEST_CASE("transcript: non-numeric time rejected with the right code") {
    const std::string csv =
        "turn_id,speaker,start,stop,utterance\n"
        "0,A,zero,2.0,x\n";
    try {
        (void)corpus::parse_transcript(csv);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonNumericTime);
    }
}

TEST_CASE("transcript: missing column rejected") {
    const std::string csv = "turn_id,speaker,start,utterance\n0,A,0.0,x\n";
    try {
        (void)corpus::parse_transcript(csv);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingColumn);
    }
}

TEST_CASE("transcript: more than two speakers rejected") {
    const std::string csv =
        "turn_id,speaker,start,stop,utterance\n"
        "0,A,0.0,1.0,a\n1,B,1.5,2.0,b\n2,C,2.5,3.0,c\n";
    try {
        (void)corpus::parse_transcript(csv);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MoreThanTwoSpeakers);
    }
}

TEST_CASE("transcript: small cross-speaker overlap clipped, large rejected") {
    const std::string small =
        "turn_id,speaker,start,stop,utterance\n"
        "0,A,0.0,2.3,a\n1,B,2.0,4.0,b\n";
    const auto t = corpus::parse_transcript(small);
    CHECK(t.turns[0].end_s == doctest::Approx(2.0));
    CHECK(t.turns[1].start_s == doctest::Approx(2.0));

    const std::string big =
        "turn_id,speaker,start,stop,utterance\n"
        "0,A,0.0,3.0,a\n1,B,2.0,4.0,b\n";
    try {
        (void)corpus::parse_transcript(big);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnsortedAfterMerge);
    }
}

TEST_CASE("transcript: serialize/parse round-trip and merge idempotence") {
    auto stream = rng::Xoshiro256(91);
    for (int trial = 0; trial < 30; ++trial) {
        // random floor-alternating transcript CSV on a millisecond grid
        std::string csv = "turn_id,speaker,start,stop,utterance\n";
        long clock_ms = 0;
        const int n = 2 + static_cast<int>(stream.bounded(15));
        char buf[128];
        for (int i = 0; i < n; ++i) {
            const long dur_ms = 200 + static_cast<long>(stream.bounded(3000));
            const long gap_ms = static_cast<long>(stream.bounded(1500));
            const long start_ms = clock_ms + gap_ms;
            const long stop_ms = start_ms + dur_ms;
            clock_ms = stop_ms;
            std::snprintf(buf, sizeof(buf), "%d,%s,%.3f,%.3f,utterance %d\n", i,
                          i % 2 == 0 ? "A" : "B", start_ms / 1000.0, stop_ms / 1000.0, i);
            csv += buf;
        }
        const auto parsed = corpus::parse_transcript(csv);
        REQUIRE(parsed.turns.size() == static_cast<std::size_t>(n));

        // round-trip: serialize(parse(x)) re-parses to an equal transcript
        const auto again = corpus::parse_transcript(corpus::serialize_transcript(parsed));
        REQUIRE(again.turns.size() == parsed.turns.size());
        for (std::size_t i = 0; i < parsed.turns.size(); ++i) {
            CHECK(again.turns[i].speaker == parsed.turns[i].speaker);
            CHECK(again.turns[i].start_s == parsed.turns[i].start_s);
            CHECK(again.turns[i].end_s == parsed.turns[i].end_s);
            CHECK(again.turns[i].text == parsed.turns[i].text);
        }
        // idempotence on an already floor-alternating table: identity on
        // (speaker, start, end)
        const auto reparsed = corpus::parse_transcript(csv);
        for (std::size_t i = 0; i < parsed.turns.size(); ++i) {
            CHECK(reparsed.turns[i].speaker == parsed.turns[i].speaker);
            CHECK(reparsed.turns[i].start_s == parsed.turns[i].start_s);
            CHECK(reparsed.turns[i].end_s == parsed.turns[i].end_s);
        }
    }
}

// ---------------------------------------------------------------------------
// audio
// ---------------------------------------------------------------------------

TEST_CASE("audio: mono 16 kHz passes through unchanged") {
    std::vector<float> x(16000);
    auto stream = rng::Xoshiro256(5);
    for (auto& v : x) v = static_cast<float>(stream.uniform(-0.9, 0.9));
    const auto track = corpus::load_audio(make_wav(x, 16000, 1, true));
    REQUIRE(track.samples.size() == x.size());
    CHECK(track.sample_rate_hz == 16000);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(track.samples[i] == x[i]);
}

TEST_CASE("audio: opposite-phase stereo averages to silence") {
    std::vector<float> inter(2 * 8000);
    auto stream = rng::Xoshiro256(6);
    for (std::size_t i = 0; i < inter.size(); i += 2) {
        const float v = static_cast<float>(stream.uniform(-0.8, 0.8));
        inter[i] = v;
        inter[i + 1] = -v;
    }
    const auto track = corpus::load_audio(make_wav(inter, 44100, 2, true));
    for (float s : track.samples) CHECK(std::fabs(s) < 1e-7f);
}

TEST_CASE("audio: swapping stereo channels leaves mono output unchanged") {
    std::vector<float> a(2 * 44100), b(2 * 44100);
    auto stream = rng::Xoshiro256(61);
    for (std::size_t i = 0; i < a.size(); i += 2) {
        const float l = static_cast<float>(stream.uniform(-0.7, 0.7));
        const float r = static_cast<float>(stream.uniform(-0.7, 0.7));
        a[i] = l;
        a[i + 1] = r;
        b[i] = r;
        b[i + 1] = l;
    }
    const auto ta = corpus::load_audio(make_wav(a, 44100, 2, true));
    const auto tb = corpus::load_audio(make_wav(b, 44100, 2, true));
    REQUIRE(ta.samples.size() == tb.samples.size());
    for (std::size_t i = 0; i < ta.samples.size(); ++i)
        CHECK(ta.samples[i] == tb.samples[i]);
}

TEST_CASE("audio: 44.1 kHz sine resamples to 16 kHz with the tone intact") {
    std::vector<float> x(44100);
    for (std::size_t n = 0; n < x.size(); ++n)
        x[n] = 0.7f * std::sin(2.0 * 3.14159265358979 * 440.0 * n / 44100.0);
    const auto track = corpus::load_audio(make_wav(x, 44100, 1, true));
    REQUIRE(track.samples.size() == 16000);

    // spectral oracle: the strongest 1 Hz bin must be 440 +- 1
    double best_mag = 0.0;
    double best_freq = 0.0;
    for (double f = 100.0; f <= 1000.0; f += 1.0) {
        const double m = dft_magnitude(track.samples, f, 16000.0);
        if (m > best_mag) {
            best_mag = m;
            best_freq = f;
        }
    }
    CHECK(std::fabs(best_freq - 440.0) <= 1.0);
    // and energy above the 7.6 kHz cutoff must be tiny
    const double hf = dft_magnitude(track.samples, 7900.0, 16000.0);
    CHECK(hf < best_mag * 1e-3);
}

TEST_CASE("audio: resampling is linear in amplitude") {
    // amplitude kept below full scale so the [-1, 1] output clamp stays
    // inactive (clamping is the one non-linear step)
    std::vector<float> x(22050);
    auto stream = rng::Xoshiro256(77);
    for (auto& v : x) v = static_cast<float>(stream.uniform(-0.8, 0.8));
    std::vector<float> half(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) half[i] = 0.5f * x[i];
    const auto full_track = corpus::load_audio(make_wav(x, 44100, 1, true));
    const auto half_track = corpus::load_audio(make_wav(half, 44100, 1, true));
    REQUIRE(full_track.samples.size() == half_track.samples.size());
    for (std::size_t i = 0; i < full_track.samples.size(); ++i)
        CHECK(std::fabs(0.5 * full_track.samples[i] - half_track.samples[i]) < 1e-6);
}

TEST_CASE("audio: PCM16 write/read round-trips to quantization accuracy") {
    std::vector<float> x(4000);
    for (std::size_t n = 0; n < x.size(); ++n)
        x[n] = 0.4f * std::sin(2.0 * 3.14159265358979 * 220.0 * n / 16000.0);
    const std::string path = "roundtrip_tmp.wav";
    wav::write_wav_pcm16(path, x, 16000);
    const auto track = corpus::load_audio_file(path);
    REQUIRE(track.samples.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(std::fabs(track.samples[i] - x[i]) < 1.0 / 32000.0);
    std::remove(path.c_str());
}

TEST_CASE("audio: unsupported encodings rejected") {
    std::vector<float> x(1000, 0.1f);
    CHECK_THROWS_AS((void)corpus::load_audio(make_wav(x, 22050, 1, true)), Error);
    auto bytes = make_wav(x, 16000, 1, false);
    bytes[0] = 'X';  // break the RIFF magic
    try {
        (void)corpus::load_audio(bytes);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CorruptHeader);
    }
}

// ---------------------------------------------------------------------------
// FAU tables
// ---------------------------------------------------------------------------

namespace {

std::string fau_header() {
    std::string h = "frame,timestamp,success";
    for (const char* au : corpus::kAuIds) h += std::string(",") + au + "_r";
    return h + "\n";
}

std::string fau_row(int frame, double ts, int success, double value) {
    std::string r = std::to_string(frame) + "," + std::to_string(ts) + "," +
                    std::to_string(success);
    for (std::size_t i = 0; i < corpus::kAuIds.size(); ++i)
        r += "," + std::to_string(value + static_cast<double>(i) * 0.01);
    return r + "\n";
}

} // namespace

TEST_CASE("fau: three valid rows") {
    const std::string csv = fau_header() + fau_row(1, 0.000, 1, 0.5) +
                            fau_row(2, 0.033, 1, 0.6) + fau_row(3, 0.066, 1, 0.7);
    const auto t = corpus::parse_fau_table(csv);
    REQUIRE(t.size() == 3);
    CHECK(t.valid[0] == 1);
    CHECK(t.valid[2] == 1);
    CHECK(t.channels.size() == corpus::kAuIds.size());
    CHECK(t.channels.at("AU01")[0] == doctest::Approx(0.5));
    CHECK(t.frame_rate_hz == doctest::Approx(1.0 / 0.033).epsilon(1e-3));
}

TEST_CASE("fau: success=0 masks the frame but keeps its values") {
    const std::string csv = fau_header() + fau_row(1, 0.000, 1, 0.5) +
                            fau_row(2, 0.033, 0, 0.9) + fau_row(3, 0.066, 1, 0.7);
    const auto t = corpus::parse_fau_table(csv);
    CHECK(t.valid[1] == 0);
    CHECK(t.channels.at("AU01")[1] == doctest::Approx(0.9));
}

TEST_CASE("fau: missing AU column names the AU") {
    std::string h = "frame,timestamp,success";
    for (const char* au : corpus::kAuIds)
        if (std::string(au) != "AU45") h += std::string(",") + au + "_r";
    try {
        (void)corpus::parse_fau_table(h + "\n");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingAuColumn);
        CHECK(std::string(e.what()).find("AU45") != std::string::npos);
    }
}

TEST_CASE("fau: non-monotone timestamps rejected") {
    const std::string csv =
        fau_header() + fau_row(1, 0.000, 1, 0.5) + fau_row(2, 0.066, 1, 0.6) +
        fau_row(3, 0.033, 1, 0.7);
    try {
        (void)corpus::parse_fau_table(csv);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonMonotoneTimestamps);
    }
}

// ---------------------------------------------------------------------------
// surveys
// ---------------------------------------------------------------------------

TEST_CASE("surveys: paired rows parse, out-of-scale rejected, unpaired warned") {
    const std::map<std::string, double> registry{{"Affect", 9.0}, {"I like you", 7.0}};
    const std::string header = "conversation_id,participant_id,Affect,I like you\n";

    SUBCASE("paired") {
        const auto r = corpus::parse_surveys(header + "c1,p1,8,6\nc1,p2,7,7\n", registry);
        REQUIRE(r.responses.size() == 2);
        CHECK(r.warnings.empty());
        CHECK(r.responses[0].ratings.at("Affect") == doctest::Approx(8.0));
        CHECK(r.responses[0].scale_max.at("I like you") == doctest::Approx(7.0));
    }
    SUBCASE("out of scale") {
        try {
            (void)corpus::parse_surveys(header + "c1,p1,10,6\n", registry);
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::OutOfScaleRating);
        }
    }
    SUBCASE("unpaired still returned, with a warning") {
        const auto r = corpus::parse_surveys(header + "c2,p1,5,5\n", registry);
        REQUIRE(r.responses.size() == 1);
        REQUIRE(r.warnings.size() == 1);
        CHECK(r.warnings[0].find("c2") != std::string::npos);
    }
}

TEST_CASE("transcript: unsorted rows are ordered by start before merging") {
    const std::string csv =
        "turn_id,speaker,start,stop,utterance\n"
        "0,B,3.500,4.000,late\n"
        "1,A,0.000,2.000,early\n";
    const auto t = corpus::parse_transcript(csv);
    REQUIRE(t.turns.size() == 2);
    CHECK(t.turns[0].speaker == "A");
    CHECK(t.turns[1].speaker == "B");
}

TEST_CASE("transcript: containment that clips a turn away is rejected") {
    // same start, different speakers: the clip would zero the first turn
    const std::string csv =
        "turn_id,speaker,start,stop,utterance\n"
        "0,A,1.000,1.400,a\n"
        "1,B,1.000,3.000,b\n";
    try {
        (void)corpus::parse_transcript(csv);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnsortedAfterMerge);
    }
}

TEST_CASE("surveys: missing construct column is a missing-column error") {
    const std::map<std::string, double> registry{{"Affect", 9.0}, {"I like you", 7.0}};
    try {
        (void)corpus::parse_surveys("conversation_id,participant_id,Affect\nc1,p1,5\n",
                                    registry);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingColumn);
    }
}
