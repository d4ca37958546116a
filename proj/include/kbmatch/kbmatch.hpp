#pragma once

#include "kbmatch/baseline.hpp"
#include "kbmatch/blocking.hpp"
#include "kbmatch/error.hpp"
#include "kbmatch/evaluation.hpp"
#include "kbmatch/graph.hpp"
#include "kbmatch/knowledge_base.hpp"
#include "kbmatch/matching.hpp"
#include "kbmatch/parallel.hpp"
#include "kbmatch/statistics.hpp"
#include "kbmatch/synthetic.hpp"
#include "kbmatch/text.hpp"
#include "kbmatch/triples.hpp"
