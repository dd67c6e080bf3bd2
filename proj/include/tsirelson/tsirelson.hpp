#ifndef TSIRELSON_TSIRELSON_HPP
#define TSIRELSON_TSIRELSON_HPP

#include "tsirelson/bell.hpp"
#include "tsirelson/errors.hpp"
#include "tsirelson/io.hpp"
#include "tsirelson/pef.hpp"
#include "tsirelson/polytope.hpp"
#include "tsirelson/scenarios.hpp"
#include "tsirelson/solver/barrier.hpp"
#include "tsirelson/solver/simplex.hpp"

#endif
