#pragma once

#include <cstdint>
#include <vector>

namespace govrek {

// Number of monotone lattice paths across a grid of the given extents:
// (l+w-2)!/((l-1)!(w-1)!) in 2D and (l+w+h-3)!/((l-1)!(w-1)!(h-1)!) in 3D.
// Throws Overflow when the result exceeds uint64, InvalidInput on bad dims.
std::uint64_t count_monotone_paths(const std::vector<std::int64_t>& dims);

} // namespace govrek
