#pragma once

#include "lungaug/array_api.hpp"
#include "lungaug/compositor.hpp"
#include "lungaug/core/error.hpp"
#include "lungaug/core/label_map.hpp"
#include "lungaug/core/manifest.hpp"
#include "lungaug/core/parallel.hpp"
#include "lungaug/core/png_io.hpp"
#include "lungaug/core/raster.hpp"
#include "lungaug/core/rng.hpp"
#include "lungaug/core/sample_io.hpp"
#include "lungaug/datasetprep.hpp"
#include "lungaug/metrics.hpp"
#include "lungaug/scheduler.hpp"
#include "lungaug/stats.hpp"
#include "lungaug/transforms/apply.hpp"
