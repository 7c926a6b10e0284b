// Umbrella header for the aeromag toolkit.
#pragma once

#include "aeromag/calibration.hpp"
#include "aeromag/error_analysis.hpp"
#include "aeromag/flight.hpp"
#include "aeromag/frames.hpp"
#include "aeromag/io.hpp"
#include "aeromag/noise.hpp"
#include "aeromag/random.hpp"
#include "aeromag/sensors.hpp"
#include "aeromag/spectral.hpp"
#include "aeromag/tl_model.hpp"
