#pragma once

#include "mdthresh/error.hpp"
#include "mdthresh/rng.hpp"
#include "mdthresh/matrix.hpp"
#include "mdthresh/graph.hpp"
#include "mdthresh/generators.hpp"
#include "mdthresh/threshold.hpp"
#include "mdthresh/parallel.hpp"
#include "mdthresh/frontier.hpp"
#include "mdthresh/sir.hpp"
#include "mdthresh/io.hpp"
#include "mdthresh/experiment.hpp"
