#pragma once

#include "rgerm/error.hpp"
#include "rgerm/scalar.hpp"
#include "rgerm/multi_index.hpp"
#include "rgerm/series.hpp"
#include "rgerm/germ.hpp"
#include "rgerm/spectrum.hpp"
#include "rgerm/normal_form.hpp"
#include "rgerm/dynamics.hpp"
#include "rgerm/basin.hpp"
#include "rgerm/io.hpp"
#include "rgerm/pipeline.hpp"
