#pragma once

#include <string>
#include <vector>

#include "sedkit/tensor.hpp"

namespace sedkit {

inline constexpr int kNumClasses = 10;

// The 10 domestic sound event classes, alphabetical; index = class id.
const std::vector<std::string>& class_names();
int class_id(const std::string& name);

struct Event {
    int class_id = 0;
    double onset = 0.0;   // seconds
    double offset = 0.0;  // seconds
};

struct ClipEvents {
    std::string clip_id;
    double duration = 10.0;  // seconds
    std::vector<Event> events;
};

void validate_events(const ClipEvents& clip);

// Tab-separated event lines: clip_id<TAB>onset<TAB>offset<TAB>class_name.
// A leading header line is skipped when its onset field is not numeric.
// Rows group into clips by id, first-appearance order.
std::vector<ClipEvents> read_events_tsv(const std::string& path);
void write_events_tsv(const std::string& path, const std::vector<ClipEvents>& clips);

// Frame-level indicator labels [frames, n_classes]: frame t is active for an
// event iff the frame midpoint (t + 0.5) * frame_dur lies in [onset, offset).
TensorF rasterize(const ClipEvents& clip, int frames, double frame_dur_s);

}  // namespace sedkit
