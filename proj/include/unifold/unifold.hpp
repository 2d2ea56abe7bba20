#ifndef UNIFOLD_UNIFOLD_HPP
#define UNIFOLD_UNIFOLD_HPP

#include "unifold/calibration.hpp"
#include "unifold/critical_values.hpp"
#include "unifold/data_io.hpp"
#include "unifold/dirac_mixture.hpp"
#include "unifold/error.hpp"
#include "unifold/folding.hpp"
#include "unifold/gaussian_mixture.hpp"
#include "unifold/golden_section.hpp"
#include "unifold/mixture.hpp"
#include "unifold/normal.hpp"
#include "unifold/prop_verify.hpp"
#include "unifold/random.hpp"
#include "unifold/simulation.hpp"
#include "unifold/unimodality_test.hpp"
#include "unifold/weighted_sample.hpp"

#endif  // UNIFOLD_UNIFOLD_HPP
