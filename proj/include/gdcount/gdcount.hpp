#pragma once

#include "gdcount/error.hpp"
#include "gdcount/grid.hpp"
#include "gdcount/multivariate.hpp"
#include "gdcount/mvn.hpp"
#include "gdcount/special_fn.hpp"
#include "gdcount/univariate.hpp"
#include "gdcount/verification.hpp"
