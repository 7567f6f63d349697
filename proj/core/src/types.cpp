#include "rehabkit/types.hpp"

#include <stdexcept>

namespace rehabkit {

const char* to_string(Label l) {
    return l == Label::correct ? "correct" : "deviant";
}

const char* to_string(Exercise e) {
    switch (e) {
    case Exercise::HS: return "HS";
    case Exercise::SKE: return "SKE";
    case Exercise::IRQ: return "IRQ";
    case Exercise::SLR: return "SLR";
    }
    return "?";
}

Label label_from_string(const std::string& s) {
    if (s == "correct") return Label::correct;
    if (s == "deviant") return Label::deviant;
    throw std::invalid_argument("unknown label: " + s);
}

Exercise exercise_from_string(const std::string& s) {
    for (Exercise e : kAllExercises)
        if (s == to_string(e)) return e;
    throw std::invalid_argument("unknown exercise: " + s);
}

namespace {
constexpr const char* kChannelNames[kChannelCount] = {"ax", "ay", "az",    "gx",   "gy",
                                                      "gz", "mag", "pitch", "roll"};
}

const char* channel_name(Channel c) { return kChannelNames[index_of(c)]; }

Channel channel_from_name(const std::string& s) {
    for (Channel c : kAllChannels)
        if (s == kChannelNames[index_of(c)]) return c;
    throw std::invalid_argument("unknown channel: " + s);
}

} // namespace rehabkit
