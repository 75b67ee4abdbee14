#pragma once

#include "lastiter/certify.hpp"
#include "lastiter/core.hpp"
#include "lastiter/errors.hpp"
#include "lastiter/plmax.hpp"
#include "lastiter/rates.hpp"
#include "lastiter/sequences.hpp"
#include "lastiter/solver.hpp"
#include "lastiter/worstcase.hpp"
