#pragma once

#include "cudfopt/criteria.hpp"
#include "cudfopt/factgen.hpp"
#include "cudfopt/generator.hpp"
#include "cudfopt/model.hpp"
#include "cudfopt/parser.hpp"
#include "cudfopt/preprocessor.hpp"
#include "cudfopt/semantics.hpp"
#include "cudfopt/solver.hpp"
