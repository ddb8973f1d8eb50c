#pragma once

#include <lds/rational.hpp>
#include <lds/coefficient.hpp>
#include <lds/linear_combination.hpp>
#include <lds/lattice.hpp>
#include <lds/reduction.hpp>
#include <lds/symmetry.hpp>
#include <lds/quadrature.hpp>
#include <lds/propagators.hpp>
#include <lds/evolution.hpp>
#include <lds/oracle.hpp>
#include <lds/job.hpp>
#include <lds/commands.hpp>
