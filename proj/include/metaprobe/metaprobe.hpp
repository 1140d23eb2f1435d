#pragma once

#include "metaprobe/baselines.hpp"
#include "metaprobe/digest.hpp"
#include "metaprobe/error.hpp"
#include "metaprobe/fixtures.hpp"
#include "metaprobe/ingest.hpp"
#include "metaprobe/live.hpp"
#include "metaprobe/metrics.hpp"
#include "metaprobe/promptkit.hpp"
#include "metaprobe/providers.hpp"
#include "metaprobe/respparse.hpp"
#include "metaprobe/runner.hpp"
