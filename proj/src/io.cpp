#include "fraclat/io.hpp"

#include <fstream>
#include <sstream>

#include "fraclat/errors.hpp"

namespace fraclat {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace fraclat
