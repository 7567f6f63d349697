#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace rehabkit {

/// Per-repetition execution verdict. "deviant" is the positive class
/// everywhere metrics are computed.
enum class Label : std::uint8_t { correct = 0, deviant = 1 };

enum class Exercise : std::uint8_t { HS, SKE, IRQ, SLR };

inline constexpr std::array<Exercise, 4> kAllExercises = {Exercise::HS, Exercise::SKE,
                                                          Exercise::IRQ, Exercise::SLR};

const char* to_string(Label l);
const char* to_string(Exercise e);
Label label_from_string(const std::string& s);
Exercise exercise_from_string(const std::string& s);

/// The nine signal channels: six sampled by the device, three derived.
enum class Channel : int { AX = 0, AY, AZ, GX, GY, GZ, MAG, PITCH, ROLL };

inline constexpr int kChannelCount = 9;
inline constexpr int kSampledChannelCount = 6;

inline constexpr std::array<Channel, kChannelCount> kAllChannels = {
    Channel::AX, Channel::AY, Channel::AZ,  Channel::GX,   Channel::GY,
    Channel::GZ, Channel::MAG, Channel::PITCH, Channel::ROLL};

inline constexpr int index_of(Channel c) { return static_cast<int>(c); }
inline constexpr bool is_derived(Channel c) { return index_of(c) >= kSampledChannelCount; }

const char* channel_name(Channel c);
Channel channel_from_name(const std::string& s);

} // namespace rehabkit
