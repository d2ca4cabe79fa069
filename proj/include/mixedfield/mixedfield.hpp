// SPDX-License-Identifier: Apache-2.0
//
// mixedfield: mixed near-field / far-field localization for hybrid planar arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MIXEDFIELD_MIXEDFIELD_HPP
#define MIXEDFIELD_MIXEDFIELD_HPP

#include "mixedfield/core.hpp"
#include "mixedfield/geometry.hpp"
#include "mixedfield/frontend.hpp"
#include "mixedfield/subspace.hpp"
#include "mixedfield/peaks.hpp"
#include "mixedfield/estimators.hpp"
#include "mixedfield/coarse_dft.hpp"
#include "mixedfield/localize.hpp"
#include "mixedfield/music3d.hpp"
#include "mixedfield/crb.hpp"
#include "mixedfield/config.hpp"
#include "mixedfield/experiment.hpp"
#include "mixedfield/csv.hpp"

#endif
