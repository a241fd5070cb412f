#pragma once

// Median exact growth factor of 100 x 100 Gaussian GEPP from a pilot run:
//   pivotlab tail --n 100 --trials 500 --t 1 --seed 424242
// (median_g_exact column of the resulting CSV).
inline constexpr double kPilotMedianGrowthN100 = 5.252;
