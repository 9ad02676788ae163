#pragma once

#include <string>

namespace qlag {

/// Fixed 12-significant-digit rendering used for every emitted artifact, so
/// golden files compare byte-for-byte. Non-finite values render as "nan",
/// "inf" or "-inf".
std::string format_number(double x);

}  // namespace qlag
