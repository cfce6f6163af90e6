#pragma once

#include "tssr/analysis.hpp"
#include "tssr/errors.hpp"
#include "tssr/io.hpp"
#include "tssr/linalg.hpp"
#include "tssr/multirate.hpp"
#include "tssr/simulation.hpp"
#include "tssr/system.hpp"
#include "tssr/tensor.hpp"
