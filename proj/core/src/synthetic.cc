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


#include "wdsguard/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "wdsguard/errors.h"
#include "wdsguard/rng.h"

namespace wdsguard {

namespace {

constexpr int kTanks = 7;
constexpr int kPumps = 11;

// Column positions within kBatadalSensors.
std::size_t level(int t) { return static_cast<std::size_t>(t); }
std::size_t pump_flow(int p) { return 7 + 2 * static_cast<std::size_t>(p); }
std::size_t pump_status(int p) { return 8 + 2 * static_cast<std::size_t>(p); }
constexpr std::size_t kValveFlow = 29;
constexpr std::size_t kValveStatus = 30;
constexpr std::size_t kFirstPressure = 31;
constexpr std::size_t kPressures = 12;

enum class AttackKind { kPumpForcedOn, kPressureSpoof, kLevelReplay, kValveClosed };

struct Interval {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  AttackKind kind = AttackKind::kPumpForcedOn;
};

std::vector<Interval> place_attacks(const SyntheticConfig& c, Rng& rng) {
  std::vector<Interval> out;
  if (c.attack_intervals <= 0) return out;
  // Spread intervals over equal slots after a clean warm-up period.
  const std::size_t warmup = std::min<std::size_t>(c.rows / 10, 200);
  const std::size_t slot = (c.rows - warmup) / static_cast<std::size_t>(c.attack_intervals);
  if (slot < static_cast<std::size_t>(c.max_attack_hours) + 2) {
    throw InvalidArgument("synthetic frame too short for the requested attacks");
  }
  for (int k = 0; k < c.attack_intervals; ++k) {
    const auto len = static_cast<std::size_t>(
        c.min_attack_hours +
        static_cast<int>(rng.below(static_cast<std::uint64_t>(
            c.max_attack_hours - c.min_attack_hours + 1))));
    const std::size_t start =
        warmup + slot * static_cast<std::size_t>(k) + 1 + rng.below(slot - len - 1);
    out.push_back({start, start + len, static_cast<AttackKind>(k % 4)});
  }
  return out;
}

}  // namespace

TimeSeriesFrame make_synthetic_batadal(const SyntheticConfig& c) {
  if (c.rows < 50) throw InvalidArgument("synthetic frame needs at least 50 rows");
  if (c.min_attack_hours < 1 || c.max_attack_hours < c.min_attack_hours) {
    throw InvalidArgument("invalid attack length range");
  }
  Rng rng(c.seed);
  const auto attacks = place_attacks(c, rng);

  const std::size_t d = kBatadalSensors.size();
  Matrix values(c.rows, d);
  Labels labels(c.rows, 0);
  std::vector<Timestamp> timestamps(c.rows);
  const auto start = parse_batadal_datetime("06/01/14 00").value();

  std::vector<double> tank(kTanks), phase(kTanks), capacity(kTanks);
  for (int t = 0; t < kTanks; ++t) {
    capacity[t] = 3.0 + 1.5 * t;
    tank[t] = capacity[t] * (0.4 + 0.2 * rng.uniform());
    phase[t] = 2.0 * std::numbers::pi * rng.uniform();
  }
  std::vector<int> on(kPumps, 0);
  on[0] = 1;
  std::vector<double> replay(kTanks, 0.0);

  for (std::size_t r = 0; r < c.rows; ++r) {
    timestamps[r] = start + std::chrono::hours(r);
    const Interval* attack = nullptr;
    for (const auto& a : attacks) {
      if (r >= a.begin && r < a.end) attack = &a;
    }
    labels[r] = attack ? 1 : 0;
    const double hour = static_cast<double>(r % 24);

    // Pumps switch on low tank levels and off on high ones.
    for (int p = 1; p < kPumps; ++p) {
      const int t = p % kTanks;
      const double fill = tank[t] / capacity[t];
      if (fill < 0.3) on[p] = 1;
      if (fill > 0.8) on[p] = 0;
    }
    int valve = tank[1] / capacity[1] < 0.5 ? 1 : 0;
    if (attack && attack->kind == AttackKind::kPumpForcedOn) on[5] = on[6] = 1;
    if (attack && attack->kind == AttackKind::kValveClosed) valve = 0;

    // Tank dynamics: demand follows a diurnal cycle, inflow comes from pumps.
    for (int t = 0; t < kTanks; ++t) {
      const double demand =
          0.12 * capacity[t] *
          (1.0 + 0.6 * std::sin(2.0 * std::numbers::pi * hour / 24.0 + phase[t]));
      double inflow = 0.0;
      for (int p = 0; p < kPumps; ++p) {
        if (p % kTanks == t && on[p]) inflow += 0.2 * capacity[t];
      }
      if (t == 1 && valve) inflow += 0.1 * capacity[t];
      tank[t] += 0.25 * (inflow - demand) + 0.02 * c.noise * rng.normal();
      tank[t] = std::clamp(tank[t], 0.05 * capacity[t], capacity[t]);
    }

    auto row = [&](std::size_t col) -> double& { return values(r, col); };
    for (int t = 0; t < kTanks; ++t) row(level(t)) = tank[t];
    for (int p = 0; p < kPumps; ++p) {
      row(pump_status(p)) = on[p];
      row(pump_flow(p)) =
          on[p] ? (30.0 + 4.0 * p) * (1.0 + 0.03 * c.noise * rng.normal()) : 0.0;
    }
    row(kValveStatus) = valve;
    row(kValveFlow) = valve ? 25.0 * (1.0 + 0.05 * c.noise * rng.normal()) : 0.0;
    for (std::size_t j = 0; j < kPressures; ++j) {
      const int t = static_cast<int>(j % kTanks);
      const int p = static_cast<int>((j * 3) % kPumps);
      row(kFirstPressure + j) = 20.0 + 6.0 * tank[t] / capacity[t] +
                                0.08 * row(pump_flow(p)) +
                                0.4 * c.noise * rng.normal();
    }

    if (attack && attack->kind == AttackKind::kPressureSpoof) {
      // P_J317 and P_J415 report inflated pressure.
      row(kFirstPressure + 9) += 4.0;
      row(kFirstPressure + 5) += 3.0;
    }
    if (attack && attack->kind == AttackKind::kLevelReplay) {
      // L_T1 repeats a stale reading while pumps keep running.
      if (r == attack->begin) replay[0] = tank[0];
      row(level(0)) = replay[0];
      on[6] = 1;
    }
  }
  std::vector<std::string> names(kBatadalSensors.begin(), kBatadalSensors.end());
  return TimeSeriesFrame(std::move(timestamps), std::move(names), std::move(values),
                         std::move(labels));
}

}  // namespace wdsguard
