#pragma once

#include "gsg/config.hpp"
#include "gsg/error.hpp"
#include "gsg/eval.hpp"
#include "gsg/gcc_phat.hpp"
#include "gsg/geometry.hpp"
#include "gsg/grid.hpp"
#include "gsg/grid_io.hpp"
#include "gsg/signal.hpp"
#include "gsg/sim.hpp"
#include "gsg/srp.hpp"
#include "gsg/wav.hpp"
