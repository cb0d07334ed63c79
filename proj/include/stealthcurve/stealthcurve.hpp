// Copyright 2026 The Stealthcurve Authors
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

#pragma once

#include "stealthcurve/divergence.hpp"
#include "stealthcurve/errors.hpp"
#include "stealthcurve/grid.hpp"
#include "stealthcurve/lti.hpp"
#include "stealthcurve/output_spectrum.hpp"
#include "stealthcurve/simulate.hpp"
#include "stealthcurve/spectra.hpp"
#include "stealthcurve/tradeoff.hpp"
