// Copyright 2026 The privaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVAUDIT_PRIVAUDIT_HPP
#define PRIVAUDIT_PRIVAUDIT_HPP

#include "privaudit/accounting.hpp"
#include "privaudit/data.hpp"
#include "privaudit/error.hpp"
#include "privaudit/experiments.hpp"
#include "privaudit/gpm.hpp"
#include "privaudit/io.hpp"
#include "privaudit/mia.hpp"
#include "privaudit/model.hpp"
#include "privaudit/nn.hpp"
#include "privaudit/parallel.hpp"
#include "privaudit/rng.hpp"
#include "privaudit/sensitivity.hpp"
#include "privaudit/train.hpp"
#include "privaudit/version.hpp"

#endif  // PRIVAUDIT_PRIVAUDIT_HPP
