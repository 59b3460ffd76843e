#pragma once

#include "ctm/automata.hpp"
#include "ctm/bench.hpp"
#include "ctm/clause.hpp"
#include "ctm/data.hpp"
#include "ctm/errors.hpp"
#include "ctm/learner.hpp"
#include "ctm/model_io.hpp"
#include "ctm/random.hpp"
#include "ctm/reference.hpp"
#include "ctm/sample.hpp"
