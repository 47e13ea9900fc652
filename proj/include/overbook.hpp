// Copyright 2026 The Overbook Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include "overbook/analytics.hpp"
#include "overbook/binomial.hpp"
#include "overbook/contract.hpp"
#include "overbook/futures.hpp"
#include "overbook/knapsack.hpp"
#include "overbook/offload.hpp"
#include "overbook/params.hpp"
#include "overbook/quadrature.hpp"
#include "overbook/realization.hpp"
#include "overbook/report.hpp"
#include "overbook/simulator.hpp"
#include "overbook/spot.hpp"
