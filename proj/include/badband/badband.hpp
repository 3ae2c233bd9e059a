#pragma once

// Matched-filter based bad band detection for hyperspectral cubes.

#include "badband/error.hpp"
#include "badband/random.hpp"
#include "badband/parallel.hpp"
#include "badband/cube.hpp"
#include "badband/covariance.hpp"
#include "badband/matched_filter.hpp"
#include "badband/detector.hpp"
#include "badband/envi.hpp"
#include "badband/synth.hpp"
#include "badband/report.hpp"
#include "badband/svg.hpp"
