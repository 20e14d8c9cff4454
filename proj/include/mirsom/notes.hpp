#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "mirsom/pitch.hpp"

namespace mirsom {

struct NoteEvent {
    double start_s = 0.0;
    double end_s = 0.0;
    std::vector<double> frame_cents;
    double pitch_cents = 0.0;  // histogram mode of frame_cents
    bool qualifies_melody = false;

    double duration() const { return end_s - start_s; }
};

struct NoteOptions {
    double min_event_s = 0.030;        // events shorter than this are discarded
    double max_dev_cents = 60.0;       // frame accepted within +/- this of the running reference
    int bridge_frames = 0;             // unvoiced frames tolerated inside an event
    double min_note_s = 0.100;         // melody notes must be at least this long
    double max_interval_cents = 1200.0;
};

namespace note_detail {

// Incremental 1-cent-bin histogram mode, ties toward the lowest bin.
class RunningMode {
public:
    void add(double cents) {
        const long long bin = std::llround(cents);
        const int c = ++counts_[bin];
        if (c > best_count_ || (c == best_count_ && bin < best_bin_)) {
            best_count_ = c;
            best_bin_ = bin;
        }
    }
    double mode() const { return static_cast<double>(best_bin_); }
    bool empty() const { return best_count_ == 0; }

private:
    std::map<long long, int> counts_;
    int best_count_ = 0;
    long long best_bin_ = 0;
};

}  // namespace note_detail

// Mode of the event's frame values on a 1-cent grid, clamped into the range
// the frames actually cover.
inline double event_pitch(const NoteEvent& event) {
    note_detail::RunningMode rm;
    double lo = event.frame_cents.front(), hi = lo;
    for (double c : event.frame_cents) {
        rm.add(c);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    return std::clamp(rm.mode(), lo, hi);
}

// Stage 2: an agent walks the track; a voiced frame extends the open event
// while it stays within +/- max_dev of the event's running mode, anything
// else closes it. Too-short events are dropped.
inline std::vector<NoteEvent> segment_events(const PitchTrack& track, const NoteOptions& opt = {}) {
    std::vector<NoteEvent> events;
    NoteEvent cur;
    note_detail::RunningMode ref;
    int gap = 0;

    auto close = [&]() {
        if (!cur.frame_cents.empty() && cur.duration() >= opt.min_event_s - 1e-9) {
            cur.pitch_cents = event_pitch(cur);
            events.push_back(cur);
        }
        cur = NoteEvent{};
        ref = note_detail::RunningMode{};
        gap = 0;
    };

    for (const auto& frame : track.frames) {
        if (!frame.voiced) {
            if (!cur.frame_cents.empty() && ++gap > opt.bridge_frames) close();
            continue;
        }
        if (!cur.frame_cents.empty() && std::fabs(frame.cents - ref.mode()) > opt.max_dev_cents) close();
        if (cur.frame_cents.empty()) cur.start_s = frame.time_s;
        cur.frame_cents.push_back(frame.cents);
        cur.end_s = frame.time_s + track.hop_s;
        ref.add(frame.cents);
        gap = 0;
    }
    close();
    return events;
}

// Stages 4-5: keep long events, then chain-filter by melodic interval. The
// first long event anchors the chain; each later one must land within
// max_interval of the previously kept pitch.
inline std::vector<NoteEvent> filter_melody_notes(const std::vector<NoteEvent>& events,
                                                  const NoteOptions& opt = {}) {
    std::vector<NoteEvent> kept;
    for (const auto& e : events) {
        if (e.duration() < opt.min_note_s - 1e-9) continue;
        if (!kept.empty() &&
            std::fabs(e.pitch_cents - kept.back().pitch_cents) > opt.max_interval_cents)
            continue;
        kept.push_back(e);
        kept.back().qualifies_melody = true;
    }
    return kept;
}

}  // namespace mirsom
