#pragma once

#include "mbo/config.hpp"
#include "mbo/convolve.hpp"
#include "mbo/diagnostics.hpp"
#include "mbo/energetics.hpp"
#include "mbo/errors.hpp"
#include "mbo/experiments.hpp"
#include "mbo/grid.hpp"
#include "mbo/initial.hpp"
#include "mbo/io.hpp"
#include "mbo/rng.hpp"
#include "mbo/scheme.hpp"
#include "mbo/spectral.hpp"
#include "mbo/tensions.hpp"
#include "mbo/trajectory.hpp"
