#pragma once

#include <string>

namespace headlead {

/// Shortest form with up to 9 significant digits ("%.9g"). All text writers
/// use this so that parse/serialize round-trips are byte-identical.
std::string format_g9(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace headlead
