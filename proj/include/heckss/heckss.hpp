#pragma once

#include "heckss/baselines.hpp"
#include "heckss/chain_io.hpp"
#include "heckss/config.hpp"
#include "heckss/data_io.hpp"
#include "heckss/dataset.hpp"
#include "heckss/distributions.hpp"
#include "heckss/errors.hpp"
#include "heckss/fit.hpp"
#include "heckss/gibbs.hpp"
#include "heckss/likelihood.hpp"
#include "heckss/mvn.hpp"
#include "heckss/normal.hpp"
#include "heckss/optim.hpp"
#include "heckss/params.hpp"
#include "heckss/posterior.hpp"
#include "heckss/priors.hpp"
#include "heckss/rng.hpp"
#include "heckss/simulation.hpp"
