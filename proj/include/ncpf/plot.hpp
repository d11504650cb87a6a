#pragma once

#include <string>
#include <vector>

#include "ncpf/types.hpp"

namespace ncpf {

/// Weighted particle values of one state coordinate at one time step.
struct DensityColumn {
  std::vector<double> values;
  std::vector<double> weights;
};

/// One per-coordinate figure: truth dashed, estimate solid, optional grey
/// particle-density shading behind them. Output is a standalone SVG and is
/// byte-deterministic for identical inputs.
void write_state_plot_svg(const std::string& path, Index index_one_based,
                          const std::vector<double>& truth,
                          const std::vector<double>& estimate,
                          const std::vector<DensityColumn>& density = {});

}  // namespace ncpf
