#pragma once

#include "eja/algebra.hpp"
#include "eja/element.hpp"
#include "eja/linear_map.hpp"
#include "eja/spectral.hpp"
#include "eja/random.hpp"
#include "eja/liegroup.hpp"
#include "eja/specfun.hpp"
#include "eja/optimize.hpp"
#include "eja/verify.hpp"
