#pragma once

#include "medestim/csv.hpp"
#include "medestim/data_model.hpp"
#include "medestim/errors.hpp"
#include "medestim/estimators.hpp"
#include "medestim/forest.hpp"
#include "medestim/inference.hpp"
#include "medestim/linear_models.hpp"
#include "medestim/nuisance.hpp"
#include "medestim/rng.hpp"
#include "medestim/simulation.hpp"
