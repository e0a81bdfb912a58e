#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <vector>

#include "carnot/error.hpp"

namespace carnot {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

using PointQ = std::vector<Rat>;
using PointD = std::vector<double>;

// Canonical text form: "p" when the denominator is one, otherwise "p/q" in
// lowest terms with q > 0.
std::string rat_str(const Rat& x);

// Accepts "p" or "p/q" with optional sign on p; rejects q == 0 and any other
// shape.
Rat rat_parse(const std::string& s);

double to_double(const Rat& x);

std::string point_str(const PointQ& x);

PointD point_double(const PointQ& x);

} // namespace carnot
