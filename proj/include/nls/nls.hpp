#pragma once

#include "nls/spectral_grid.hpp"
#include "nls/complex_field.hpp"
#include "nls/fft.hpp"
#include "nls/norms.hpp"
#include "nls/field_io.hpp"
#include "nls/flows.hpp"
#include "nls/integrators.hpp"
#include "nls/initial_data.hpp"
#include "nls/analysis.hpp"
#include "nls/bernstein.hpp"
#include "nls/config.hpp"
#include "nls/experiment.hpp"
#include "nls/verify.hpp"
