#pragma once

#include "ssslab/construction.hpp"
#include "ssslab/montecarlo.hpp"
#include "ssslab/oracle.hpp"
#include "ssslab/rational.hpp"
#include "ssslab/report.hpp"
#include "ssslab/rng.hpp"
#include "ssslab/seqstep.hpp"
#include "ssslab/version.hpp"
