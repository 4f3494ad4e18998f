#pragma once

#include "leapssn/baselines.hpp"
#include "leapssn/driver.hpp"
#include "leapssn/hilbert.hpp"
#include "leapssn/linalg.hpp"
#include "leapssn/problem.hpp"
#include "leapssn/problems/analytic.hpp"
#include "leapssn/problems/image.hpp"
#include "leapssn/problems/membrane.hpp"
#include "leapssn/problems/svm.hpp"
#include "leapssn/problems/tv.hpp"
#include "leapssn/rng.hpp"
#include "leapssn/subsolver.hpp"
#include "leapssn/suite.hpp"
#include "leapssn/trace_io.hpp"
#include "leapssn/verify.hpp"
