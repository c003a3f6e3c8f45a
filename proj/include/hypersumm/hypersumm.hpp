#pragma once

#include "hypersumm/config.hpp"
#include "hypersumm/corpus.hpp"
#include "hypersumm/html_export.hpp"
#include "hypersumm/hypergraph.hpp"
#include "hypersumm/noise.hpp"
#include "hypersumm/preprocess.hpp"
#include "hypersumm/random.hpp"
#include "hypersumm/rouge.hpp"
#include "hypersumm/text.hpp"
