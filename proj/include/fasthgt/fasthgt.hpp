#pragma once

// Umbrella header: evolutionary-tree simulation, closeness estimation, and
// greedy triplet-based reconstruction.

#include "fasthgt/distance_matrix.hpp"
#include "fasthgt/engine.hpp"
#include "fasthgt/errors.hpp"
#include "fasthgt/exact_oracle.hpp"
#include "fasthgt/fasta.hpp"
#include "fasthgt/generate.hpp"
#include "fasthgt/model.hpp"
#include "fasthgt/newick.hpp"
#include "fasthgt/phylip.hpp"
#include "fasthgt/recon_tree.hpp"
#include "fasthgt/rng.hpp"
#include "fasthgt/rooted_tree.hpp"
#include "fasthgt/simulate.hpp"
#include "fasthgt/tail_bounds.hpp"
#include "fasthgt/thresholds.hpp"
#include "fasthgt/topology.hpp"
#include "fasthgt/triplet.hpp"
