#pragma once

#include "lakevortex/config.hpp"
#include "lakevortex/continuum.hpp"
#include "lakevortex/depth.hpp"
#include "lakevortex/diagnostics.hpp"
#include "lakevortex/dynamics.hpp"
#include "lakevortex/elliptic.hpp"
#include "lakevortex/errors.hpp"
#include "lakevortex/fingerprint.hpp"
#include "lakevortex/grid.hpp"
#include "lakevortex/kernel_table.hpp"
#include "lakevortex/poisson.hpp"
#include "lakevortex/simulate.hpp"
#include "lakevortex/vec2.hpp"
