#include "sedkit/events.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sedkit {

const std::vector<std::string>& class_names() {
    static const std::vector<std::string> names = {
        "Alarm_bell_ringing", "Blender", "Cat",           "Dishes",        "Dog",
        "Electric_shaver_toothbrush", "Frying", "Running_water", "Speech", "Vacuum_cleaner"};
    return names;
}

int class_id(const std::string& name) {
    const auto& names = class_names();
    for (int i = 0; i < kNumClasses; ++i)
        if (names[static_cast<std::size_t>(i)] == name) return i;
    throw std::invalid_argument("class_id: unknown class '" + name + "'");
}

void validate_events(const ClipEvents& clip) {
    if (clip.duration <= 0.0) throw std::invalid_argument("validate_events: duration must be > 0");
    for (const auto& e : clip.events) {
        if (e.class_id < 0 || e.class_id >= kNumClasses)
            throw std::invalid_argument("validate_events: class id out of range");
        if (!(e.onset >= 0.0 && e.onset < e.offset && e.offset <= clip.duration))
            throw std::invalid_argument("validate_events: need 0 <= onset < offset <= duration in clip '" +
                                        clip.clip_id + "'");
    }
}

namespace {

bool parse_seconds(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

std::vector<ClipEvents> read_events_tsv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_events_tsv: cannot open " + path);
    std::vector<ClipEvents> clips;
    std::map<std::string, std::size_t> index;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::string cur;
        for (char c : line) {
            if (c == '\t') {
                cols.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        cols.push_back(cur);
        if (cols.size() != 4)
            throw std::runtime_error("read_events_tsv: expected 4 tab-separated columns at " + path +
                                     ":" + std::to_string(line_no));
        double onset, offset;
        if (!parse_seconds(cols[1], onset)) {
            if (line_no == 1) continue;  // header row
            throw std::runtime_error("read_events_tsv: bad onset at " + path + ":" +
                                     std::to_string(line_no));
        }
        if (!parse_seconds(cols[2], offset))
            throw std::runtime_error("read_events_tsv: bad offset at " + path + ":" +
                                     std::to_string(line_no));
        Event ev;
        ev.class_id = class_id(cols[3]);
        ev.onset = onset;
        ev.offset = offset;
        auto it = index.find(cols[0]);
        if (it == index.end()) {
            index.emplace(cols[0], clips.size());
            ClipEvents clip;
            clip.clip_id = cols[0];
            clip.events.push_back(ev);
            clips.push_back(std::move(clip));
        } else {
            clips[it->second].events.push_back(ev);
        }
    }
    return clips;
}

void write_events_tsv(const std::string& path, const std::vector<ClipEvents>& clips) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_events_tsv: cannot open " + path);
    os << "filename\tonset\toffset\tevent_label\n";
    std::ostringstream fmt;
    fmt.setf(std::ios::fixed);
    fmt.precision(3);
    for (const auto& clip : clips)
        for (const auto& e : clip.events) {
            fmt.str("");
            fmt << clip.clip_id << '\t' << e.onset << '\t' << e.offset << '\t'
                << class_names()[static_cast<std::size_t>(e.class_id)] << '\n';
            os << fmt.str();
        }
    if (!os) throw std::runtime_error("write_events_tsv: write failed for " + path);
}

TensorF rasterize(const ClipEvents& clip, int frames, double frame_dur_s) {
    if (frames < 1) throw std::invalid_argument("rasterize: frames must be >= 1");
    if (frame_dur_s <= 0.0) throw std::invalid_argument("rasterize: frame duration must be > 0");
    validate_events(clip);
    TensorF y({frames, kNumClasses});
    for (const auto& e : clip.events)
        for (int t = 0; t < frames; ++t) {
            const double mid = (t + 0.5) * frame_dur_s;
            if (mid >= e.onset && mid < e.offset) y.at(t, e.class_id) = 1.0f;
        }
    return y;
}

}  // namespace sedkit
