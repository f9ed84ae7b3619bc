#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace fraclat {

// Lattice displacement on Z^d. The dimension is the vector length.
using Offset = std::vector<int>;

inline double norm2(const Offset& x) {
    double s = 0.0;
    for (int c : x) s += double(c) * double(c);
    return std::sqrt(s);
}

inline int norm1(const Offset& x) {
    int s = 0;
    for (int c : x) s += std::abs(c);
    return s;
}

inline int norm_inf(const Offset& x) {
    int s = 0;
    for (int c : x) s = std::max(s, std::abs(c));
    return s;
}

inline bool is_zero(const Offset& x) {
    for (int c : x)
        if (c != 0) return false;
    return true;
}

// Canonical representative of the symmetry orbit of x under per-coordinate
// sign flips and coordinate permutations: absolute values sorted descending.
Offset orbit_representative(const Offset& x);

// All distinct images of x under the full lattice symmetry group.
std::vector<Offset> orbit_of(const Offset& x);

// All offsets with |x|_inf <= radius, in lexicographic order.
std::vector<Offset> box_offsets(int d, int radius);

// All canonical orbit representatives with |x|_inf <= radius.
std::vector<Offset> box_orbit_representatives(int d, int radius);

}  // namespace fraclat
