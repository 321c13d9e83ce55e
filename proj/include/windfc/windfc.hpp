#pragma once

#include "windfc/bagging.hpp"
#include "windfc/bpnn.hpp"
#include "windfc/config.hpp"
#include "windfc/dataset.hpp"
#include "windfc/error.hpp"
#include "windfc/kmeans.hpp"
#include "windfc/metrics.hpp"
#include "windfc/pipeline.hpp"
#include "windfc/preprocess.hpp"
#include "windfc/random.hpp"
#include "windfc/relief.hpp"
#include "windfc/similar_days.hpp"
