#pragma once

#include <space/core.hpp>
#include <space/eval.hpp>
#include <space/graph.hpp>
#include <space/io.hpp>
#include <space/lasso.hpp>
#include <space/mb.hpp>
#include <space/simgen.hpp>
#include <space/space_fit.hpp>
#include <space/tuning.hpp>
