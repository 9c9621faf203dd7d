#pragma once

#include "lobc/core.hpp"
#include "lobc/hamiltonian.hpp"
#include "lobc/pucci.hpp"
#include "lobc/regularize.hpp"
#include "lobc/eigen.hpp"
#include "lobc/solver.hpp"
#include "lobc/analysis.hpp"
