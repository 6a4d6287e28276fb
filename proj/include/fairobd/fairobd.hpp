// Copyright 2026 The fairobd Authors.
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

#include "fairobd/adversary.hpp"
#include "fairobd/core.hpp"
#include "fairobd/error.hpp"
#include "fairobd/geometry.hpp"
#include "fairobd/linalg.hpp"
#include "fairobd/mirror.hpp"
#include "fairobd/offline.hpp"
#include "fairobd/policies.hpp"
#include "fairobd/solvers.hpp"
