#pragma once

// Seeded benchmark model families.

#include <cstdint>

#include "mixmap/model.hpp"

namespace mixmap {

/// Chain of n/2 Sum nodes (even ids), each with a pendant Max node (odd ids).
/// Node potentials ~ N(0, 0.1^2) and edge entries ~ N(0, sigma^2), card 3.
/// Throws InvalidArgument for odd or nonpositive n.
PairwiseModel gen_hmm(int n, double sigma, std::uint64_t seed);

/// Minimum spanning tree of a random symmetric Uniform[0,1] matrix. Leaves are
/// Max and internal nodes Sum. When `max_leaves >= 0`, only the lowest-index
/// `max_leaves` leaves stay Max. Throws InvalidArgument for n < 3.
PairwiseModel gen_latent_tree(int n, double sigma, std::uint64_t seed, int card = 3, int max_leaves = -1);

enum class GridPattern { SumLoopy, MaxLoopy };

/// side x side 4-neighbour lattice; node r*side+c is Sum iff (r+c) is even in
/// SumLoopy, odd in MaxLoopy. Throws InvalidArgument for side < 2.
PairwiseModel gen_grid(int side, GridPattern pattern, double sigma, std::uint64_t seed, int card = 3);

}  // namespace mixmap
