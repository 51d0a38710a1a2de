#pragma once

#include "bfree/errors.hpp"
#include "bfree/rational.hpp"
#include "bfree/primes.hpp"
#include "bfree/bigfloat.hpp"
#include "bfree/bset.hpp"
#include "bfree/distance.hpp"
#include "bfree/covering.hpp"
#include "bfree/scaling.hpp"
#include "bfree/qsqrt5.hpp"
#include "bfree/circle.hpp"
#include "bfree/golden.hpp"
#include "bfree/report.hpp"
