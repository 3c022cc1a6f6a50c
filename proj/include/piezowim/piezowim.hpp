// Copyright 2026 The piezowim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#pragma once

#include "piezowim/errors.hpp"
#include "piezowim/beam_fem.hpp"
#include "piezowim/modal.hpp"
#include "piezowim/response.hpp"
#include "piezowim/pavement.hpp"
#include "piezowim/energy_budget.hpp"
#include "piezowim/signal.hpp"
#include "piezowim/io.hpp"
