#ifndef REINSURE_REINSURE_HPP
#define REINSURE_REINSURE_HPP

#include "reinsure/errors.hpp"
#include "reinsure/numerics.hpp"
#include "reinsure/loss_models.hpp"
#include "reinsure/kernels.hpp"
#include "reinsure/contracts.hpp"
#include "reinsure/valuation.hpp"
#include "reinsure/optimizer.hpp"
#include "reinsure/conditions.hpp"
#include "reinsure/cli.hpp"

#endif  // REINSURE_REINSURE_HPP
