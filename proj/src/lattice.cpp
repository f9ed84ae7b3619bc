#include "fraclat/lattice.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace fraclat {

Offset orbit_representative(const Offset& x) {
    Offset r = x;
    for (int& c : r) c = std::abs(c);
    std::sort(r.begin(), r.end(), std::greater<int>());
    return r;
}

std::vector<Offset> orbit_of(const Offset& x) {
    const int d = int(x.size());
    Offset rep = orbit_representative(x);
    std::set<Offset> out;
    Offset perm = rep;
    std::sort(perm.begin(), perm.end());
    do {
        // all sign choices on nonzero coordinates
        const int n = 1 << d;
        for (int mask = 0; mask < n; ++mask) {
            Offset y(d);
            bool skip = false;
            for (int j = 0; j < d; ++j) {
                y[j] = (mask >> j & 1) ? -perm[j] : perm[j];
                if (perm[j] == 0 && (mask >> j & 1)) skip = true;  // avoid duplicate -0
            }
            if (!skip) out.insert(y);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {out.begin(), out.end()};
}

std::vector<Offset> box_offsets(int d, int radius) {
    std::vector<Offset> out;
    Offset x(d, -radius);
    while (true) {
        out.push_back(x);
        int j = d - 1;
        while (j >= 0 && x[j] == radius) x[j--] = -radius;
        if (j < 0) break;
        ++x[j];
    }
    return out;
}

std::vector<Offset> box_orbit_representatives(int d, int radius) {
    std::set<Offset> reps;
    for (const Offset& x : box_offsets(d, radius)) reps.insert(orbit_representative(x));
    return {reps.begin(), reps.end()};
}

}  // namespace fraclat
