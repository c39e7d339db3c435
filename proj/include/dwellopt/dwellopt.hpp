#pragma once

#include "dwellopt/adaptive_config.hpp"
#include "dwellopt/case_io.hpp"
#include "dwellopt/dose_engine.hpp"
#include "dwellopt/dvi.hpp"
#include "dwellopt/eval/compare.hpp"
#include "dwellopt/eval/convergence.hpp"
#include "dwellopt/eval/export.hpp"
#include "dwellopt/eval/reevaluate.hpp"
#include "dwellopt/eval/report.hpp"
#include "dwellopt/eval/statistics.hpp"
#include "dwellopt/evaluator.hpp"
#include "dwellopt/geometry.hpp"
#include "dwellopt/moea/archive.hpp"
#include "dwellopt/moea/checkpoint.hpp"
#include "dwellopt/moea/clustering.hpp"
#include "dwellopt/moea/distribution.hpp"
#include "dwellopt/moea/dominance.hpp"
#include "dwellopt/moea/gomea.hpp"
#include "dwellopt/moea/linkage_tree.hpp"
#include "dwellopt/objective_model.hpp"
#include "dwellopt/patient_model.hpp"
#include "dwellopt/protocol_io.hpp"
#include "dwellopt/rng.hpp"
