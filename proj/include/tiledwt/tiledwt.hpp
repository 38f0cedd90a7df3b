#pragma once

#include "tiledwt/error.hpp"
#include "tiledwt/image.hpp"
#include "tiledwt/wavelet.hpp"
#include "tiledwt/inspect.hpp"
#include "tiledwt/metrics.hpp"
#include "tiledwt/imageio.hpp"
#include "tiledwt/fileio.hpp"
#include "tiledwt/synth.hpp"
