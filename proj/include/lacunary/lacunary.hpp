#pragma once

#include "bounds.hpp"
#include "covers.hpp"
#include "discrepancy.hpp"
#include "dyadic.hpp"
#include "error.hpp"
#include "harness.hpp"
#include "independence.hpp"
#include "io.hpp"
#include "points.hpp"
#include "splitmix.hpp"
