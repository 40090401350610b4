#pragma once

#include "pulseforge/bench.hpp"
#include "pulseforge/channel.hpp"
#include "pulseforge/circuit.hpp"
#include "pulseforge/common.hpp"
#include "pulseforge/compiler.hpp"
#include "pulseforge/cr_sim.hpp"
#include "pulseforge/device.hpp"
#include "pulseforge/export.hpp"
#include "pulseforge/layout.hpp"
#include "pulseforge/lower.hpp"
#include "pulseforge/noise.hpp"
#include "pulseforge/pulse.hpp"
#include "pulseforge/unitary.hpp"
