// Copyright 2026 The tgt Authors
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

#include "tgt/bits.hpp"
#include "tgt/codec.hpp"
#include "tgt/constructions.hpp"
#include "tgt/errors.hpp"
#include "tgt/experiment.hpp"
#include "tgt/io.hpp"
#include "tgt/oracle.hpp"
#include "tgt/random.hpp"
#include "tgt/semantics.hpp"
