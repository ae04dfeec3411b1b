#pragma once

#include "ascr/geometry.hpp"
#include "ascr/mesh.hpp"
#include "ascr/observation.hpp"
#include "ascr/simulation.hpp"

namespace ascr {

inline constexpr double kHectare = 1e4;  // m^2

/// The coastline passes 6 km south of the array centre, rising 0.3 m
/// northward per metre east.
inline constexpr double kSyntheticCoastNorthing = -6000.0;
inline constexpr double kSyntheticCoastSlope = 0.3;
/// Scale of the derived covariate d = distance_to_coast / 15 km.
inline constexpr double kSyntheticCoastScale = 15000.0;

/// Six sensors on a triangular lattice (rows of 3, 2 and 1) with the given
/// spacing, centred on the origin.
SensorArray synthetic_array(double spacing = 7000.0);

/// depth (m), distance_to_coast (m) and d. Land south of the coast has
/// depth 0 and distance 0.
FunctionCovariates synthetic_covariates();

/// Inner 10 km at 5 km, outer 60 km at 10 km.
MeshSpec synthetic_mesh_spec();

/// Mesh over the synthetic covariates. `sea_only` drops cells with zero depth
/// or distance so that log and smooth terms of both covariates are defined.
Mesh synthetic_mesh(const SensorArray& array, const MeshSpec& spec, bool sea_only = false);

/// Source-level grid for simulations: 127 to 199 dB in 3 dB steps.
SourceLevelGrid synthetic_source_level_grid();

/// Simulation scenarios with variable (1) or fixed (2) source levels,
/// density D ~ d + d2 on the hectare scale.
ScenarioSpec synthetic_scenario(int which, std::uint64_t seed = 1);

}  // namespace ascr
