#include "sso/accounting.hpp"

namespace sso {

std::uint64_t props_for_iteration(const SampleSizes& sizes, std::size_t gamma) {
  return static_cast<std::uint64_t>(sizes.h) + 2 * static_cast<std::uint64_t>(sizes.g) +
         2 * static_cast<std::uint64_t>(gamma) * static_cast<std::uint64_t>(sizes.b);
}

std::uint64_t PropCounter::charge(const SampleSizes& sizes, std::size_t gamma) {
  const std::uint64_t props = props_for_iteration(sizes, gamma);
  entries_.push_back({sizes, gamma, props});
  total_ += props;
  return props;
}

}  // namespace sso
