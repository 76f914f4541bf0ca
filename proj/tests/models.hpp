#pragma once

#include "pssmp/levy_model.hpp"

namespace testmodels {

inline pssmp::LevyModel brownian() { return {0.0, 1.0, {}, 0.125, 1.0}; }

inline pssmp::LevyModel pure_drift(double alpha = 1.0) { return {-1.0, 0.0, {}, 0.0, alpha}; }

inline pssmp::LevyModel killed_drift() { return {-1.0, 0.0, {}, 0.1, 1.0}; }

inline pssmp::LevyModel two_sided() {
  return {0.0, 0.5, {pssmp::CompoundPoisson{1.0, pssmp::TwoSidedExponentialJumps{3.0, 3.0, 0.5}}}, 0.2,
          1.0};
}

}  // namespace testmodels
