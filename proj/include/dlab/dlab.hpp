#pragma once

#include "numeric.hpp"
#include "smoothstep.hpp"
#include "chart.hpp"
#include "diffeo.hpp"
#include "flow.hpp"
#include "sequences.hpp"
#include "construction.hpp"
#include "words.hpp"
#include "verify.hpp"
#include "kopell.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "suites.hpp"
