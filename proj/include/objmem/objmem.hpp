#pragma once

#include "objmem/core.hpp"
#include "objmem/vocabulary.hpp"
#include "objmem/attributes.hpp"
#include "objmem/world.hpp"
#include "objmem/oracle.hpp"
#include "objmem/memory.hpp"
#include "objmem/protocol.hpp"
#include "objmem/association.hpp"
#include "objmem/explorer.hpp"
#include "objmem/aggregator.hpp"
#include "objmem/metrics.hpp"
#include "objmem/config.hpp"
#include "objmem/episode.hpp"
#include "objmem/logio.hpp"
#include "objmem/evaluation.hpp"
