#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace fraclat {

// 17 significant digits: doubles survive a text round trip bit-exactly.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string read_file(const std::string& path);

}  // namespace fraclat
