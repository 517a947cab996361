#pragma once

#include "hyperpart/certify.hpp"
#include "hyperpart/errors.hpp"
#include "hyperpart/experiment.hpp"
#include "hyperpart/io.hpp"
#include "hyperpart/partition.hpp"
#include "hyperpart/planted_model.hpp"
#include "hyperpart/projections.hpp"
#include "hyperpart/rng.hpp"
#include "hyperpart/solver.hpp"
#include "hyperpart/spectral.hpp"
#include "hyperpart/tensor.hpp"
