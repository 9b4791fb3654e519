#pragma once

#include "errors.hpp"
#include "numberfield.hpp"
#include "rules.hpp"
#include "geometry.hpp"
#include "ida.hpp"
#include "cocycle.hpp"
#include "abelian.hpp"
#include "paircorr.hpp"
#include "diffraction.hpp"
#include "io.hpp"
#include "report.hpp"
