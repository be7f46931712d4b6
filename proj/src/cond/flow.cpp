#include "farm/cond/flow.hpp"

#include <string>

#include "farm/core/rng.hpp"

namespace farm::cond {

FlowState flow_interpolate(const Field& r_unit, const Field& epsilon, double t, double delta) {
  if (!(t >= 0.0 && t <= 1.0 - delta)) {
    throw InvalidArgument("flow time " + std::to_string(t) + " outside [0, " + std::to_string(1.0 - delta) + "]");
  }
  require(r_unit.spec() == epsilon.spec(), "noise field shape does not match the volume");
  FlowState s{t, epsilon, Field(r_unit.spec()), Field(r_unit.spec())};
  for (std::size_t i = 0; i < r_unit.size(); ++i) {
    s.z[i] = t * r_unit[i] + (1.0 - t) * epsilon[i];
    s.velocity[i] = r_unit[i] - epsilon[i];
  }
  return s;
}

Field gaussian_field(const VoxelGridSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  Field f(spec);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.normal();
  return f;
}

}  // namespace farm::cond
