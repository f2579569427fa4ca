#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sso/sampling.hpp"

namespace sso {

/// Propagations for one iteration: |S_h| + 2|S_g| + 2 gamma |S_B|.
/// The variant is encoded purely by the sizes (Full: all three equal n).
std::uint64_t props_for_iteration(const SampleSizes& sizes, std::size_t gamma);

/// Running propagation total for one optimizer run.
class PropCounter {
 public:
  struct Entry {
    SampleSizes sizes;
    std::size_t gamma = 0;
    std::uint64_t props = 0;
  };

  /// Charges one iteration and returns its propagation count.
  std::uint64_t charge(const SampleSizes& sizes, std::size_t gamma);

  /// What `charge` would add, without recording it.
  static std::uint64_t quote(const SampleSizes& sizes, std::size_t gamma) {
    return props_for_iteration(sizes, gamma);
  }

  std::uint64_t total() const { return total_; }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
  std::uint64_t total_ = 0;
};

}  // namespace sso
