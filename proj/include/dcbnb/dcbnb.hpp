#pragma once

#include "bnb.hpp"
#include "dc_bound.hpp"
#include "geometry.hpp"
#include "klap.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "point_io.hpp"
#include "rif3d.hpp"
#include "sim2d.hpp"
#include "synth.hpp"
