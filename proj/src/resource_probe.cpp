#include "qs/resource_probe.hpp"

#include <sys/resource.h>

namespace qs {

std::size_t peak_resident_bytes() {
    rusage usage{};
    if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
    // ru_maxrss is in kilobytes on Linux.
    return static_cast<std::size_t>(usage.ru_maxrss) * 1024;
}

}  // namespace qs
