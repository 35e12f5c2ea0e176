#pragma once

#include "cosym/errors.hpp"
#include "cosym/expr.hpp"
#include "cosym/chart.hpp"
#include "cosym/parse.hpp"
#include "cosym/linalg.hpp"
#include "cosym/multi_index.hpp"
#include "cosym/smooth_map.hpp"
#include "cosym/forms.hpp"
#include "cosym/report.hpp"
#include "cosym/action.hpp"
#include "cosym/cosymplectic.hpp"
#include "cosym/groupoid.hpp"
#include "cosym/algebroid.hpp"
#include "cosym/reduction.hpp"
#include "cosym/manifest.hpp"
#include "cosym/runner.hpp"
#include "cosym/gallery.hpp"
