#pragma once

#include "bwe/error.hpp"
#include "bwe/export.hpp"
#include "bwe/featmaps.hpp"
#include "bwe/fft.hpp"
#include "bwe/generator.hpp"
#include "bwe/grid.hpp"
#include "bwe/json_io.hpp"
#include "bwe/metrics.hpp"
#include "bwe/netshape.hpp"
#include "bwe/nld.hpp"
#include "bwe/resample.hpp"
#include "bwe/signal.hpp"
#include "bwe/spectral.hpp"
#include "bwe/wav.hpp"
