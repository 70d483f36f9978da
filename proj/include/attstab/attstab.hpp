#pragma once

#include "attstab/control.hpp"
#include "attstab/errors.hpp"
#include "attstab/io.hpp"
#include "attstab/lyapunov.hpp"
#include "attstab/model.hpp"
#include "attstab/smallmat.hpp"
#include "attstab/stability.hpp"
#include "attstab/sweep.hpp"
