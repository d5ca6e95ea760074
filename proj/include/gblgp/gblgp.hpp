#pragma once

#include "gblgp/benchmarks.hpp"
#include "gblgp/dataset.hpp"
#include "gblgp/evolution.hpp"
#include "gblgp/grammar.hpp"
#include "gblgp/io.hpp"
#include "gblgp/mutation.hpp"
#include "gblgp/program.hpp"
#include "gblgp/sampler.hpp"
#include "gblgp/stats.hpp"
#include "gblgp/update.hpp"
