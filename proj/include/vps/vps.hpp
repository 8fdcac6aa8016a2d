// Umbrella header.
#pragma once

#include "vps/circular_law.hpp"
#include "vps/core.hpp"
#include "vps/measures.hpp"
#include "vps/mesolver.hpp"
#include "vps/montecarlo.hpp"
#include "vps/profiles.hpp"
#include "vps/reference.hpp"
#include "vps/separable.hpp"
