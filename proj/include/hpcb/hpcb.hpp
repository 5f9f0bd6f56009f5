#pragma once

#include "hpcb/approx_recovery.hpp"
#include "hpcb/besov_norms.hpp"
#include "hpcb/chui_wang.hpp"
#include "hpcb/coefficients.hpp"
#include "hpcb/decomposition.hpp"
#include "hpcb/error.hpp"
#include "hpcb/experiments.hpp"
#include "hpcb/grid.hpp"
#include "hpcb/hpc_transform.hpp"
#include "hpcb/index_sets.hpp"
#include "hpcb/multi_index.hpp"
#include "hpcb/parallel.hpp"
#include "hpcb/piecewise.hpp"
#include "hpcb/qmc_cubature.hpp"
#include "hpcb/test_corpus.hpp"
