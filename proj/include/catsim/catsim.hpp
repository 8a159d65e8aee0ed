#pragma once

#include "catsim/conditional.hpp"
#include "catsim/cvops.hpp"
#include "catsim/dynamics.hpp"
#include "catsim/feasibility.hpp"
#include "catsim/fits.hpp"
#include "catsim/hilbert.hpp"
#include "catsim/numkit/minimize.hpp"
#include "catsim/numkit/nls.hpp"
#include "catsim/numkit/special.hpp"
#include "catsim/numkit/tridiagonal.hpp"
