/*
 * Copyright 2026 The wdsguard Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef WDSGUARD_SYNTHETIC_H_
#define WDSGUARD_SYNTHETIC_H_

#include <cstdint>

#include "wdsguard/dataset.h"

namespace wdsguard {

// Parameters for a BATADAL-shaped synthetic frame: hourly readings of the 43
// canonical channels with diurnal tank cycles, level-driven pump switching,
// and a few labeled attack intervals that tamper with pumps, valves, and
// pressure readings.
struct SyntheticConfig {
  std::size_t rows = 4000;
  int attack_intervals = 8;
  int min_attack_hours = 15;
  int max_attack_hours = 60;
  // Multiplies every noise term.
  double noise = 1.0;
  std::uint64_t seed = 7;
};

TimeSeriesFrame make_synthetic_batadal(const SyntheticConfig& config);

}  // namespace wdsguard

#endif  // WDSGUARD_SYNTHETIC_H_
