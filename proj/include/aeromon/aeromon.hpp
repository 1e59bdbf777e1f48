#pragma once

#include "aeromon/augment.hpp"
#include "aeromon/background.hpp"
#include "aeromon/classifier.hpp"
#include "aeromon/core.hpp"
#include "aeromon/detector.hpp"
#include "aeromon/features.hpp"
#include "aeromon/image.hpp"
#include "aeromon/imgproc.hpp"
#include "aeromon/plots.hpp"
#include "aeromon/regions.hpp"
#include "aeromon/rfklt.hpp"
#include "aeromon/synth.hpp"
#include "aeromon/video_io.hpp"
