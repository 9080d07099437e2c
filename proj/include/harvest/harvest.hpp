#pragma once

#include "harvest/errors.hpp"
#include "harvest/matrix.hpp"
#include "harvest/instance.hpp"
#include "harvest/instance_io.hpp"
#include "harvest/milp.hpp"
#include "harvest/simplex.hpp"
#include "harvest/branch_and_bound.hpp"
#include "harvest/formulations.hpp"
#include "harvest/clustering.hpp"
#include "harvest/routing.hpp"
#include "harvest/capr.hpp"
#include "harvest/leasing.hpp"
#include "harvest/expgen.hpp"
#include "harvest/harness.hpp"
#include "harvest/render.hpp"
