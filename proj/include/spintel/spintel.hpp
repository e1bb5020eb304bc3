#pragma once

#include "spintel/analysis.hpp"
#include "spintel/approx.hpp"
#include "spintel/entangle_prep.hpp"
#include "spintel/measurement.hpp"
#include "spintel/quadrature.hpp"
#include "spintel/random.hpp"
#include "spintel/spin_core.hpp"
#include "spintel/teleport.hpp"
