#include "ergolab/model.hpp"

namespace ergolab {

Observation StateSpaceModel::observation_mean(const State&) const {
  throw InvalidArgument(name() + ": observations are not Gaussian");
}

}  // namespace ergolab
