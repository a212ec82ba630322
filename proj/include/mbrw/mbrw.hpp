#ifndef MBRW_MBRW_HPP
#define MBRW_MBRW_HPP

#include "mbrw/annealed.hpp"
#include "mbrw/chain.hpp"
#include "mbrw/config.hpp"
#include "mbrw/digraph.hpp"
#include "mbrw/environment.hpp"
#include "mbrw/error.hpp"
#include "mbrw/expectation.hpp"
#include "mbrw/io.hpp"
#include "mbrw/optimize.hpp"
#include "mbrw/parallel.hpp"
#include "mbrw/rng.hpp"
#include "mbrw/simplex.hpp"
#include "mbrw/special.hpp"
#include "mbrw/typegraph.hpp"
#include "mbrw/variational.hpp"

#endif
