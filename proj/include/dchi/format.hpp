#ifndef DCHI_FORMAT_HPP
#define DCHI_FORMAT_HPP

#include <string>

namespace dchi {

// Shortest representation that round-trips through double; locale-free, so
// emitted CSV/JSON is byte-stable across platforms.
std::string format_double(double v);

// RFC 4180 quoting, applied only when the field needs it.
std::string csv_escape(const std::string& field);

}  // namespace dchi

#endif  // DCHI_FORMAT_HPP
