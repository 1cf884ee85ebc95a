#pragma once

// Sample CSV: header `y,x1,...,xp`, one observation per row, numbers with
// 17 significant digits.

#include <iosfwd>
#include <string>

#include "pcrlab/dgp.hpp"

namespace pcrlab {

/// Fixed 17-significant-digit rendering used by every text
/// output so that reruns are byte-identical.
std::string format_double(double value);

void write_sample_csv(std::ostream& out, const Sample& sample);
void write_sample_csv(const std::string& path, const Sample& sample);

/// Parses a sample CSV. ParseError::line() names the offending line.
Sample read_sample_csv(std::istream& in);
Sample read_sample_csv(const std::string& path);

} // namespace pcrlab
