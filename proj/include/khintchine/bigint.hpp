#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include "khintchine/factored.hpp"

namespace khintchine::arith {

using BigInt = boost::multiprecision::cpp_int;

// Exact value of a factored integer.
BigInt to_bigint(const FactoredNat& n);

}  // namespace khintchine::arith
