// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header.

#pragma once

#include "bidir/adapt.hpp"
#include "bidir/channel.hpp"
#include "bidir/emit.hpp"
#include "bidir/harness.hpp"
#include "bidir/maxsinr.hpp"
#include "bidir/numerics.hpp"
#include "bidir/phy.hpp"
#include "bidir/presets.hpp"
#include "bidir/scenario.hpp"
