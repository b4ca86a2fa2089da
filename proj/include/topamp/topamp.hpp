#pragma once

#include "topamp/errors.hpp"
#include "topamp/experiments.hpp"
#include "topamp/floquet.hpp"
#include "topamp/io.hpp"
#include "topamp/model.hpp"
#include "topamp/moments.hpp"
#include "topamp/rng.hpp"
#include "topamp/spectral.hpp"
#include "topamp/stability.hpp"
#include "topamp/steady.hpp"
#include "topamp/topology.hpp"
#include "topamp/types.hpp"
