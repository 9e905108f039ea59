// Copyright 2026 The shapval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/// Umbrella header: cooperative-game data valuation for simulated federated
/// learning. Pulls in coalition bit-set utilities, utility oracles, exact
/// Shapley solvers, the stratified sampling estimator, budget-pruned
/// approximations, baselines, scenario generation, and the experiment
/// harness.

#ifndef SHAPVAL_SHAPVAL_HPP
#define SHAPVAL_SHAPVAL_HPP

#include "shapval/baselines.hpp"
#include "shapval/coalition.hpp"
#include "shapval/exact.hpp"
#include "shapval/harness.hpp"
#include "shapval/pruned.hpp"
#include "shapval/regression.hpp"
#include "shapval/rng.hpp"
#include "shapval/scenario.hpp"
#include "shapval/stratified.hpp"
#include "shapval/utility.hpp"
#include "shapval/valuation.hpp"

#endif  // SHAPVAL_SHAPVAL_HPP
