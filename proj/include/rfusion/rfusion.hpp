#pragma once

#include "rfusion/binomial.hpp"
#include "rfusion/consensus_sim.hpp"
#include "rfusion/fusion_center.hpp"
#include "rfusion/gaussian_model.hpp"
#include "rfusion/pbpo.hpp"
#include "rfusion/probability.hpp"
#include "rfusion/scalar_search.hpp"
#include "rfusion/single_sensor.hpp"
#include "rfusion/verify.hpp"
