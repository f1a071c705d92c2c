#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gsg/error.hpp"

namespace gsg {

// Multichannel sample stream, channel order = microphone order.
struct MultiChannel {
  double fs = 0.0;
  std::vector<std::vector<double>> channels;

  std::size_t channel_count() const { return channels.size(); }
  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }

  void validate() const {
    if (!(fs > 0.0)) throw ConfigError("signal sampling rate must be positive");
    for (const auto& ch : channels) {
      if (ch.size() != length()) throw ConfigError("all channels must have the same length");
    }
  }
};

}  // namespace gsg
