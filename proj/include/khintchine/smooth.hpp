#pragma once

#include <cstdint>
#include <vector>

#include "khintchine/primes.hpp"

namespace khintchine::arith {

// Number of basis-smooth integers q <= X, including q = 1.
std::uint64_t pi_S(const PrimeBasis& basis, double X);

// (2 / ln 2) * (ln X)^k.
double pi_S_bound(int k, double X);

// Exponent tuples a with prod p_i^{a_i} > K that stop exceeding K when any
// positive coordinate is decremented. Sorted lexicographically.
std::vector<std::vector<std::uint32_t>> minimal_solutions(const PrimeBasis& basis, double K);

}  // namespace khintchine::arith
