#pragma once

// Umbrella header.

#include "bintrc/connectivity.hpp"
#include "bintrc/io.hpp"
#include "bintrc/reduce.hpp"
#include "bintrc/semantics.hpp"
#include "bintrc/trace.hpp"
#include "bintrc/workload.hpp"
