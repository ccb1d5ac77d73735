#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "govrek/errors.hpp"

namespace govrek {

// A point in a grid domain (up to 3 coordinates) or a 1D joint-action index.
struct Point {
    std::array<double, 3> coords{0.0, 0.0, 0.0};
    int dims = 0;

    Point() = default;
    Point(double x) : coords{x, 0.0, 0.0}, dims(1) {}
    Point(double x, double y) : coords{x, y, 0.0}, dims(2) {}
    Point(double x, double y, double z) : coords{x, y, z}, dims(3) {}

    double operator[](int i) const { return coords[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return coords[static_cast<std::size_t>(i)]; }

    bool operator==(const Point& o) const {
        if (dims != o.dims) return false;
        for (int i = 0; i < dims; ++i)
            if (coords[static_cast<std::size_t>(i)] != o.coords[static_cast<std::size_t>(i)]) return false;
        return true;
    }
};

inline double squared_distance(const Point& a, const Point& b) {
    double s = 0.0;
    for (int i = 0; i < a.dims; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Describes the space a reward field lives on: a 1/2/3-dimensional grid or a
// flattened joint-action space (a 1D index range).
struct DomainDescriptor {
    enum class Kind { Grid, JointAction };

    Kind kind = Kind::Grid;
    std::vector<std::int64_t> dims; // grid extents, or {size} for joint actions

    static DomainDescriptor grid(std::vector<std::int64_t> extents) {
        if (extents.empty() || extents.size() > 3)
            throw InvalidInput("grid domain needs 1-3 dimensions");
        for (std::int64_t e : extents)
            if (e < 1) throw InvalidInput("grid extents must be >= 1");
        return DomainDescriptor{Kind::Grid, std::move(extents)};
    }

    static DomainDescriptor joint_action(std::int64_t size) {
        if (size < 1) throw InvalidInput("joint-action domain must be non-empty");
        return DomainDescriptor{Kind::JointAction, {size}};
    }

    int ndim() const { return kind == Kind::JointAction ? 1 : static_cast<int>(dims.size()); }

    std::int64_t cell_count() const {
        std::int64_t n = 1;
        for (std::int64_t e : dims) n *= e;
        return n;
    }

    // Row-major cell index -> grid coordinates.
    Point cell_point(std::int64_t index) const {
        Point p;
        p.dims = ndim();
        std::int64_t rest = index;
        for (int i = ndim() - 1; i >= 0; --i) {
            const std::int64_t extent = dims[static_cast<std::size_t>(i)];
            p[i] = static_cast<double>(rest % extent);
            rest /= extent;
        }
        return p;
    }

    std::int64_t cell_index(const std::vector<std::int64_t>& coords) const {
        if (static_cast<int>(coords.size()) != ndim())
            throw DomainMismatch("coordinate rank does not match domain");
        std::int64_t idx = 0;
        for (int i = 0; i < ndim(); ++i) {
            const std::int64_t extent = dims[static_cast<std::size_t>(i)];
            if (coords[static_cast<std::size_t>(i)] < 0 || coords[static_cast<std::size_t>(i)] >= extent)
                throw DomainMismatch("coordinate out of range");
            idx = idx * extent + coords[static_cast<std::size_t>(i)];
        }
        return idx;
    }

    std::int64_t max_extent() const {
        std::int64_t m = 1;
        for (std::int64_t e : dims) m = e > m ? e : m;
        return m;
    }

    bool operator==(const DomainDescriptor& o) const { return kind == o.kind && dims == o.dims; }

    std::string to_string() const {
        if (kind == Kind::JointAction) return "joint[" + std::to_string(dims[0]) + "]";
        std::string s = "grid[";
        for (std::size_t i = 0; i < dims.size(); ++i) {
            if (i) s += "x";
            s += std::to_string(dims[i]);
        }
        return s + "]";
    }
};

} // namespace govrek
