#pragma once

#include "wdlab/bounds.hpp"
#include "wdlab/coefficients.hpp"
#include "wdlab/config.hpp"
#include "wdlab/coupling.hpp"
#include "wdlab/error.hpp"
#include "wdlab/lab.hpp"
#include "wdlab/normal.hpp"
#include "wdlab/parallel.hpp"
#include "wdlab/processes.hpp"
#include "wdlab/report.hpp"
#include "wdlab/rng.hpp"
#include "wdlab/stats.hpp"
