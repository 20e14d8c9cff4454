#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "mirsom/mirsom.hpp"
#include "support/synth.hpp"

using Catch::Matchers::WithinAbs;

namespace {

constexpr double U = std::numeric_limits<double>::quiet_NaN();  // unvoiced marker

mirsom::PitchTrack make_track(const std::vector<double>& cents_seq) {
    mirsom::PitchTrack t;
    t.hop_s = 0.010;
    for (std::size_t i = 0; i < cents_seq.size(); ++i) {
        mirsom::PitchFrame f;
        f.time_s = 0.010 * static_cast<double>(i);
        if (!std::isnan(cents_seq[i])) {
            f.voiced = true;
            f.cents = cents_seq[i];
            f.confidence = 0.9;
        }
        t.frames.push_back(f);
    }
    return t;
}

std::vector<double> repeat(double cents, std::size_t n) { return std::vector<double>(n, cents); }

void append(std::vector<double>& seq, const std::vector<double>& tail) {
    seq.insert(seq.end(), tail.begin(), tail.end());
}

}  // namespace

TEST_CASE("constant 200 ms makes one event at its pitch", "[notes]") {
    const auto events = mirsom::segment_events(make_track(repeat(6000.0, 20)));
    REQUIRE(events.size() == 1);
    CHECK_THAT(events[0].pitch_cents, WithinAbs(6000.0, 1e-12));
    CHECK_THAT(events[0].start_s, WithinAbs(0.0, 1e-12));
    CHECK_THAT(events[0].end_s, WithinAbs(0.20, 1e-12));  // last frame time + hop
    CHECK(events[0].frame_cents.size() == 20);
}

TEST_CASE("a 20 ms blip is discarded, 30 ms survives", "[notes]") {
    std::vector<double> seq = {U, U, 6000.0, 6000.0, U, U};
    CHECK(mirsom::segment_events(make_track(seq)).empty());

    std::vector<double> longer = {U, U, 6000.0, 6000.0, 6000.0, U};
    const auto events = mirsom::segment_events(make_track(longer));
    REQUIRE(events.size() == 1);
    CHECK_THAT(events[0].duration(), WithinAbs(0.030, 1e-12));
    CHECK_THAT(events[0].start_s, WithinAbs(0.020, 1e-12));
}

TEST_CASE("a semitone-exceeding jump splits events", "[notes]") {
    std::vector<double> seq = repeat(6000.0, 10);
    append(seq, repeat(6200.0, 10));
    const auto events = mirsom::segment_events(make_track(seq));
    REQUIRE(events.size() == 2);
    CHECK_THAT(events[0].pitch_cents, WithinAbs(6000.0, 1e-12));
    CHECK_THAT(events[1].pitch_cents, WithinAbs(6200.0, 1e-12));
    CHECK_THAT(events[0].end_s, WithinAbs(0.10, 1e-12));
    CHECK_THAT(events[1].start_s, WithinAbs(0.10, 1e-12));
}

TEST_CASE("vibrato within the band stays one event", "[notes]") {
    std::vector<double> seq;
    for (int i = 0; i < 40; ++i)
        seq.push_back(6000.0 + 55.0 * std::sin(2.0 * std::numbers::pi * i / 8.0));
    const auto events = mirsom::segment_events(make_track(seq));
    REQUIRE(events.size() == 1);
    CHECK(events[0].frame_cents.size() == 40);
}

TEST_CASE("the running reference is the event mode, so glides get chopped", "[notes]") {
    // Rising 10 cents per frame: the mode stays pinned near the event's start
    // (all counts tie, lowest bin wins), so the agent cuts about every 70 cents.
    std::vector<double> seq;
    for (int i = 0; i < 30; ++i) seq.push_back(6000.0 + 10.0 * i);
    const auto events = mirsom::segment_events(make_track(seq));
    CHECK(events.size() >= 3);
    for (const auto& e : events) CHECK(e.frame_cents.size() <= 8);
}

TEST_CASE("unvoiced frames close events unless bridged", "[notes]") {
    std::vector<double> seq = repeat(6000.0, 10);
    seq.push_back(U);
    append(seq, repeat(6000.0, 10));

    CHECK(mirsom::segment_events(make_track(seq)).size() == 2);

    mirsom::NoteOptions bridged;
    bridged.bridge_frames = 1;
    const auto joined = mirsom::segment_events(make_track(seq), bridged);
    REQUIRE(joined.size() == 1);
    CHECK(joined[0].frame_cents.size() == 20);

    std::vector<double> two_gap = repeat(6000.0, 10);
    append(two_gap, {U, U});
    append(two_gap, repeat(6000.0, 10));
    CHECK(mirsom::segment_events(make_track(two_gap), bridged).size() == 2);
}

TEST_CASE("event pitch is the histogram mode", "[notes]") {
    mirsom::NoteEvent e;
    e.frame_cents = repeat(6000.0, 16);
    append(e.frame_cents, {5990.0, 5980.0, 5970.0, 5960.0});  // closing slur
    CHECK_THAT(mirsom::event_pitch(e), WithinAbs(6000.0, 1e-12));

    mirsom::NoteEvent mean_trap;
    mean_trap.frame_cents = repeat(6000.0, 16);
    append(mean_trap.frame_cents, {5950.0, 5930.0, 5910.0, 5890.0});  // deep slur
    double mean = 0.0;
    for (double c : mean_trap.frame_cents) mean += c / static_cast<double>(mean_trap.frame_cents.size());
    CHECK_THAT(mirsom::event_pitch(mean_trap), WithinAbs(6000.0, 1e-12));
    CHECK(std::fabs(mirsom::event_pitch(mean_trap) - mean) > 10.0);  // mode, not mean
}

TEST_CASE("bimodal event pitch breaks ties low", "[notes]") {
    mirsom::NoteEvent e;
    e.frame_cents = repeat(6100.0, 5);
    append(e.frame_cents, repeat(5900.0, 5));
    CHECK_THAT(mirsom::event_pitch(e), WithinAbs(5900.0, 1e-12));
}

TEST_CASE("event pitch lands inside the frame range", "[notes]") {
    mirsom::NoteEvent e;
    e.frame_cents = repeat(6000.4, 5);  // mode bin 6000 is outside [6000.4, 6000.4]
    CHECK_THAT(mirsom::event_pitch(e), WithinAbs(6000.4, 1e-12));

    std::mt19937_64 rng(31);
    for (int t = 0; t < 30; ++t) {
        mirsom::NoteEvent r;
        const int n = 1 + static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) r.frame_cents.push_back(5000.0 + 80.0 * mirsom::uniform01(rng));
        const double p = mirsom::event_pitch(r);
        const auto [lo, hi] = std::minmax_element(r.frame_cents.begin(), r.frame_cents.end());
        CHECK(p >= *lo);
        CHECK(p <= *hi);
    }
}

TEST_CASE("grace notes fall out of the melody", "[notes]") {
    std::vector<double> seq = repeat(6000.0, 15);
    append(seq, {U});
    append(seq, repeat(6080.0, 4));  // 40 ms grace
    append(seq, {U});
    append(seq, repeat(6100.0, 15));
    const auto events = mirsom::segment_events(make_track(seq));
    REQUIRE(events.size() == 3);
    const auto melody = mirsom::filter_melody_notes(events);
    REQUIRE(melody.size() == 2);
    CHECK_THAT(melody[0].pitch_cents, WithinAbs(6000.0, 1e-12));
    CHECK_THAT(melody[1].pitch_cents, WithinAbs(6100.0, 1e-12));
    for (const auto& n : melody) CHECK(n.qualifies_melody);
}

TEST_CASE("tone repetition survives the interval filter", "[notes]") {
    std::vector<double> seq;
    for (int i = 0; i < 4; ++i) {
        append(seq, repeat(5500.0, 12));
        append(seq, {U, U});
    }
    const auto melody = mirsom::filter_melody_notes(mirsom::segment_events(make_track(seq)));
    REQUIRE(melody.size() == 4);
    for (const auto& n : melody) CHECK_THAT(n.pitch_cents, WithinAbs(5500.0, 1e-12));
}

TEST_CASE("an octave-plus leap is dropped and the chain continues", "[notes]") {
    std::vector<double> seq = repeat(6000.0, 12);
    append(seq, {U});
    append(seq, repeat(7300.0, 12));  // 1300 above the anchor
    append(seq, {U});
    append(seq, repeat(6100.0, 12));  // within 1200 of the last KEPT note
    const auto events = mirsom::segment_events(make_track(seq));
    REQUIRE(events.size() == 3);
    const auto melody = mirsom::filter_melody_notes(events);
    REQUIRE(melody.size() == 2);
    CHECK_THAT(melody[0].pitch_cents, WithinAbs(6000.0, 1e-12));
    CHECK_THAT(melody[1].pitch_cents, WithinAbs(6100.0, 1e-12));
}

TEST_CASE("melody filtering is idempotent", "[notes]") {
    std::vector<double> seq = repeat(6000.0, 12);
    append(seq, {U});
    append(seq, repeat(6080.0, 4));
    append(seq, {U});
    append(seq, repeat(7400.0, 14));
    append(seq, {U});
    append(seq, repeat(6200.0, 12));
    const auto events = mirsom::segment_events(make_track(seq));
    const auto once = mirsom::filter_melody_notes(events);
    const auto twice = mirsom::filter_melody_notes(once);
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
        CHECK(once[i].start_s == twice[i].start_s);
        CHECK(once[i].pitch_cents == twice[i].pitch_cents);
    }
}

TEST_CASE("three notes and two graces resolve to five events, three melody notes", "[notes]") {
    // The classic ornamented line: long notes carrying short grace-notes.
    std::vector<double> seq = repeat(6000.0, 30);
    append(seq, repeat(6200.0, 5));   // grace riding directly on the note end
    append(seq, repeat(6000.0, 30));
    append(seq, repeat(6150.0, 4));
    append(seq, repeat(6000.0, 30));
    const auto events = mirsom::segment_events(make_track(seq));
    REQUIRE(events.size() == 5);
    CHECK(events[1].duration() < 0.1);
    CHECK(events[3].duration() < 0.1);

    const auto melody = mirsom::filter_melody_notes(events);
    REQUIRE(melody.size() == 3);
    for (const auto& n : melody) {
        CHECK_THAT(n.pitch_cents, WithinAbs(6000.0, 1e-12));
        CHECK(n.duration() >= 0.1);
    }
}

TEST_CASE("events are ordered, non-overlapping, and in range", "[notes]") {
    std::mt19937_64 rng(47);
    std::vector<double> seq;
    for (int i = 0; i < 400; ++i) {
        const double roll = mirsom::uniform01(rng);
        if (roll < 0.25) seq.push_back(U);
        else seq.push_back(5000.0 + 900.0 * mirsom::uniform01(rng));
    }
    const auto events = mirsom::segment_events(make_track(seq));
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        CHECK(e.duration() >= 0.030 - 1e-9);
        CHECK(e.pitch_cents >= *std::min_element(e.frame_cents.begin(), e.frame_cents.end()));
        CHECK(e.pitch_cents <= *std::max_element(e.frame_cents.begin(), e.frame_cents.end()));
        const double spread = *std::max_element(e.frame_cents.begin(), e.frame_cents.end()) -
                              *std::min_element(e.frame_cents.begin(), e.frame_cents.end());
        CHECK(spread <= 120.0 + 1e-9);
        if (i > 0) CHECK(e.start_s >= events[i - 1].end_s - 1e-12);
    }

    // Filtering only removes: every melody note matches a stage-2 event.
    const auto melody = mirsom::filter_melody_notes(events);
    for (const auto& n : melody) {
        bool found = false;
        for (const auto& e : events)
            found = found || (e.start_s == n.start_s && e.end_s == n.end_s &&
                              e.pitch_cents == n.pitch_cents);
        CHECK(found);
    }
}

TEST_CASE("segmentation from a synthesized melody matches the written score", "[notes]") {
    // Three 200 ms notes at 6000/6200/6400 cents with gaps: full pipeline from
    // samples through pitch tracking to events.
    const std::vector<synth::NoteSpec> score = {
        {6000.0, 0.2}, {6200.0, 0.2}, {6400.0, 0.2}};
    const auto clip = synth::clip_of(synth::note_sequence(score, 0.08));
    const auto track = mirsom::track_f0(clip);
    const auto events = mirsom::segment_events(track);
    REQUIRE(events.size() == 3);
    const auto melody = mirsom::filter_melody_notes(events);
    REQUIRE(melody.size() == 3);
    const double expected[] = {6000.0, 6200.0, 6400.0};
    for (std::size_t i = 0; i < 3; ++i) CHECK_THAT(melody[i].pitch_cents, WithinAbs(expected[i], 8.0));
}
