#pragma once

// Umbrella header: pulls in the whole analysis library.

#include "mirsom/analysis.hpp"
#include "mirsom/audio.hpp"
#include "mirsom/common.hpp"
#include "mirsom/csv.hpp"
#include "mirsom/fft.hpp"
#include "mirsom/flac.hpp"
#include "mirsom/notes.hpp"
#include "mirsom/pipeline.hpp"
#include "mirsom/pitch.hpp"
#include "mirsom/som.hpp"
#include "mirsom/spectral.hpp"
#include "mirsom/stores.hpp"
#include "mirsom/svg.hpp"
#include "mirsom/timbre.hpp"
#include "mirsom/tonal.hpp"
