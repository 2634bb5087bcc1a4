#pragma once

#include "woundambit/calibration.hpp"
#include "woundambit/contour.hpp"
#include "woundambit/curation.hpp"
#include "woundambit/error.hpp"
#include "woundambit/expert_eval.hpp"
#include "woundambit/geometry.hpp"
#include "woundambit/marker_detect.hpp"
#include "woundambit/marker_dictionary.hpp"
#include "woundambit/mask.hpp"
#include "woundambit/measure.hpp"
#include "woundambit/metrics.hpp"
#include "woundambit/overlay.hpp"
#include "woundambit/pipeline.hpp"
#include "woundambit/png_io.hpp"
#include "woundambit/raster.hpp"
#include "woundambit/synthetic.hpp"
