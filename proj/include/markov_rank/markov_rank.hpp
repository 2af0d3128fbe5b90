#pragma once

#include "markov_rank/chain_core.hpp"
#include "markov_rank/errors.hpp"
#include "markov_rank/io.hpp"
#include "markov_rank/mc_oracle.hpp"
#include "markov_rank/sink_analysis.hpp"
#include "markov_rank/source_analysis.hpp"
#include "markov_rank/spectral.hpp"
