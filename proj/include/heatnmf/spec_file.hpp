#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "heatnmf/init.hpp"
#include "heatnmf/synth.hpp"

namespace heatnmf {

// Component spec files hold one curve per line:
//
//   # comment
//   mean
//   bath    tau_c=50 tau_h=13 amp=30
//   cooling tau_c=50
//   heating tau_h=15.5
//   kernel  r=2 amp=10
//
// Unset parameters are filled from the data at initialisation time.
//
// Synthetic spec files add dataset directives and per-component weights:
//
//   n 540
//   m 32
//   dt 5
//   seed 7
//   noise range=0.01          # or sigma=<absolute std>
//   cooling tau_c=400 amp=20 weights=walk:start=1,step=0.02
//   bath tau_c=50 tau_h=12 amp=30 weights=periodic:base=0,amp=1,period=60
//
// Weight models: constant:value=V, drift:start=A,end=B,
// periodic:base=B,amp=A,period=P, walk:start=S,step=D.
// Synthetic components need explicit time constants only when they differ
// from the grid defaults; amp defaults to 1. `mean` is not allowed.

std::vector<ComponentTemplate> parse_component_spec(std::string_view text);
std::vector<ComponentTemplate> load_component_spec(const std::filesystem::path& path);

SyntheticSpec parse_synthetic_spec(std::string_view text);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

}  // namespace heatnmf
