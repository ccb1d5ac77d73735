#include "govrek/paths.hpp"

#include <limits>

#include "govrek/errors.hpp"

namespace govrek {

namespace {

// C(n, k) with overflow detection via 128-bit intermediates.
std::uint64_t binomial_checked(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i; // exact: product of i consecutive ints divides by i!
        if (result > std::numeric_limits<std::uint64_t>::max())
            throw Overflow("monotone path count exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(result);
}

} // namespace

std::uint64_t count_monotone_paths(const std::vector<std::int64_t>& dims) {
    if (dims.size() != 2 && dims.size() != 3)
        throw InvalidInput("monotone path count is defined for 2D and 3D grids");
    for (std::int64_t d : dims)
        if (d < 1) throw InvalidInput("grid extents must be >= 1");

    const std::uint64_t a = static_cast<std::uint64_t>(dims[0]) - 1;
    const std::uint64_t b = static_cast<std::uint64_t>(dims[1]) - 1;
    if (dims.size() == 2) return binomial_checked(a + b, a);

    const std::uint64_t c = static_cast<std::uint64_t>(dims[2]) - 1;
    // (a+b+c)! / (a! b! c!) = C(a+b+c, a) * C(b+c, b)
    const std::uint64_t first = binomial_checked(a + b + c, a);
    const std::uint64_t second = binomial_checked(b + c, b);
    const unsigned __int128 product = static_cast<unsigned __int128>(first) * second;
    if (product > std::numeric_limits<std::uint64_t>::max())
        throw Overflow("monotone path count exceeds 64 bits");
    return static_cast<std::uint64_t>(product);
}

} // namespace govrek
