#ifndef SVRG_SVRG_HPP
#define SVRG_SVRG_HPP

#include "svrg/random.hpp"
#include "svrg/special_functions.hpp"
#include "svrg/variates.hpp"
#include "svrg/range_distribution.hpp"
#include "svrg/model.hpp"
#include "svrg/mcmc.hpp"
#include "svrg/forecast.hpp"
#include "svrg/io.hpp"

#endif  // SVRG_SVRG_HPP
