// Copyright 2026 The qfault Authors
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

#include "qfault/builders.hpp"
#include "qfault/elaborate.hpp"
#include "qfault/engine.hpp"
#include "qfault/error_map.hpp"
#include "qfault/experiment.hpp"
#include "qfault/montecarlo.hpp"
#include "qfault/noise.hpp"
#include "qfault/pauli.hpp"
#include "qfault/program.hpp"
#include "qfault/report.hpp"
#include "qfault/schedule.hpp"
#include "qfault/steane.hpp"
