#pragma once

#include "hcho/checkpoint.hpp"
#include "hcho/config.hpp"
#include "hcho/diagnostics.hpp"
#include "hcho/duhamel.hpp"
#include "hcho/errors.hpp"
#include "hcho/experiments.hpp"
#include "hcho/grid.hpp"
#include "hcho/integrator.hpp"
#include "hcho/linear_propagators.hpp"
#include "hcho/mode_propagator.hpp"
#include "hcho/nonlinearity.hpp"
#include "hcho/parallel.hpp"
#include "hcho/random_fields.hpp"
#include "hcho/run.hpp"
#include "hcho/spectral_field.hpp"
#include "hcho/table.hpp"
#include "hcho/verify.hpp"
