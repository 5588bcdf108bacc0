#pragma once

#include <cstddef>
#include <vector>

namespace rlgaf {

// A prompt plus the response tokens generated (or demonstrated) after it.
// prefix(t) = prompt ++ response[0..t) is the decision state for step t.
// When generation emitted a terminator token it is the last response element
// and counts toward the response length.
struct Sequence {
  std::vector<int> prompt;
  std::vector<int> response;

  std::size_t response_length() const { return response.size(); }

  std::vector<int> prefix(std::size_t t) const {
    std::vector<int> out = prompt;
    out.insert(out.end(), response.begin(), response.begin() + static_cast<long>(t));
    return out;
  }

  std::vector<int> full() const { return prefix(response.size()); }

  bool operator==(const Sequence& other) const = default;
};

}  // namespace rlgaf
