#pragma once

#include "sas/adjacency.hpp"
#include "sas/baselines.hpp"
#include "sas/bench.hpp"
#include "sas/errors.hpp"
#include "sas/graphon.hpp"
#include "sas/grid.hpp"
#include "sas/io.hpp"
#include "sas/permutation.hpp"
#include "sas/pipeline.hpp"
#include "sas/random.hpp"
#include "sas/tv_admm.hpp"
