#pragma once

#include "atlas/error.hpp"
#include "atlas/model.hpp"
#include "atlas/rng.hpp"
#include "atlas/skorokhod.hpp"
#include "atlas/parallel.hpp"
#include "atlas/engine.hpp"
#include "atlas/measures.hpp"
#include "atlas/bounds.hpp"
#include "atlas/stats.hpp"
#include "atlas/validation.hpp"
