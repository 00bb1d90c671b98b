#include "headlead/textio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "headlead/error.hpp"

namespace headlead {

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write file: " + path);
    }
    out << content;
    if (!out) {
        throw Error(ErrorKind::io, "write failed: " + path);
    }
}

} // namespace headlead
