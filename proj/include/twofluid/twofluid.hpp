#pragma once

#include "domain.hpp"
#include "mat2.hpp"
#include "spectral_state.hpp"
#include "transforms.hpp"
#include "spectral_core.hpp"
#include "linear_stability.hpp"
#include "hopf_normal_form.hpp"
#include "diagnostics_energy.hpp"
#include "time_integrator.hpp"
#include "io.hpp"
#include "continuation.hpp"
