#pragma once

#include "maxent/analysis.hpp"
#include "maxent/errors.hpp"
#include "maxent/gibbs.hpp"
#include "maxent/hermitian.hpp"
#include "maxent/model.hpp"
#include "maxent/rng.hpp"
#include "maxent/solvers.hpp"
