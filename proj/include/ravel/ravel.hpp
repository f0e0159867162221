// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ravel/actions.hpp"
#include "ravel/common.hpp"
#include "ravel/corpus.hpp"
#include "ravel/http_provider.hpp"
#include "ravel/judge.hpp"
#include "ravel/metrics.hpp"
#include "ravel/orchestrator.hpp"
#include "ravel/primitives.hpp"
#include "ravel/prompts.hpp"
#include "ravel/provider.hpp"
#include "ravel/recount.hpp"
#include "ravel/report.hpp"
#include "ravel/runio.hpp"
#include "ravel/state.hpp"
#include "ravel/template_engine.hpp"
