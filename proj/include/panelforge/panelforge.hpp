#pragma once

#include "panelforge/brexit.hpp"
#include "panelforge/cli.hpp"
#include "panelforge/cmdp.hpp"
#include "panelforge/config.hpp"
#include "panelforge/distribution.hpp"
#include "panelforge/domain.hpp"
#include "panelforge/lp.hpp"
#include "panelforge/policies.hpp"
#include "panelforge/rng.hpp"
#include "panelforge/simulator.hpp"
