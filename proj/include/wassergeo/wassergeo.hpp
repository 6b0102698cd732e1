#pragma once

#include "wassergeo/core.hpp"
#include "wassergeo/space.hpp"
#include "wassergeo/cost.hpp"
#include "wassergeo/ot.hpp"
#include "wassergeo/interpolation.hpp"
#include "wassergeo/orlicz.hpp"
#include "wassergeo/curvature.hpp"
