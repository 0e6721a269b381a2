#pragma once

#include "esmc/chain.hpp"
#include "esmc/densities.hpp"
#include "esmc/errors.hpp"
#include "esmc/estimators.hpp"
#include "esmc/normal.hpp"
#include "esmc/parallel.hpp"
#include "esmc/problem.hpp"
#include "esmc/quadrature.hpp"
#include "esmc/report.hpp"
#include "esmc/rng.hpp"
#include "esmc/sampling.hpp"
#include "esmc/statistics.hpp"
#include "esmc/validation.hpp"
