#ifndef PROJFLOW_FIELDS_HPP
#define PROJFLOW_FIELDS_HPP

#include "projflow/fespace.hpp"

#include <string>
#include <vector>

namespace projflow {

// Named initial-data and forcing fields usable from configs.
//   zero      - zero field
//   case_a    - manufactured polynomial case (initial = exact u at t=0)
//   case_b    - manufactured trigonometric case
//   gradient  - (x, y), a pure gradient field (initial only)
//   rough     - deterministic multiscale sine field with a slowly decaying
//               spectrum (initial only; zero trace on rectangles with
//               integer corners, designed for the unit square)
std::vector<std::string> known_initial_fields();
std::vector<std::string> known_forcing_fields();

VectorField initial_field(const std::string& name);            // null for "zero"
TimeVectorField forcing_field(const std::string& name, double mu);  // null for "zero"

} // namespace projflow

#endif
