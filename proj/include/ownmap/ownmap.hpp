#pragma once

#include "address.hpp"
#include "amount.hpp"
#include "categorize.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "error.hpp"
#include "events.hpp"
#include "json_io.hpp"
#include "ledger.hpp"
#include "mapper.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "registry.hpp"
#include "remap.hpp"
#include "report.hpp"
#include "synth.hpp"
#include "trend.hpp"
#include "types.hpp"
