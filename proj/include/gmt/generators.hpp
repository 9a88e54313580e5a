#pragma once

#include <gmt/measure.hpp>

#include <cstdint>

namespace gmt {

/// N equally spaced points on [0,1] x {0}, endpoints included, mass 1/N each
/// (d = 2, n = 1).
Measure segment(std::size_t count);

/// Graph over [0,1] of a piecewise-linear function with `pieces` random
/// slopes drawn uniformly from [-amp, amp], sampled at N equally spaced
/// abscissae, mass 1/N each (d = 2, n = 1).
Measure lipschitz_graph(std::size_t count, double amp, std::uint64_t seed, int pieces = 16);

/// Generation g of the planar four-corner Cantor set with ratio 1/4: the 4^g
/// points (sum_j 3 a_j 4^-j, sum_j 3 b_j 4^-j) with a_j, b_j in {0, 1}, mass
/// 4^-g each (d = 2, n = 1). Generation 1 is {0, 3/4}^2.
Measure cantor4(int generation);

/// Cell centers ((i + 1/2)/N, (j + 1/2)/N) of the N x N grid on the unit
/// square, mass N^-2 each, with n = 1.
Measure square_area(std::size_t count);

}  // namespace gmt
