#pragma once

#include <cstddef>

namespace qs {

// Max resident set size of this process so far, in bytes (0 if unavailable).
std::size_t peak_resident_bytes();

}  // namespace qs
