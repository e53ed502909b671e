#pragma once

#include "gausslt/errors.hpp"
#include "gausslt/covariance.hpp"
#include "gausslt/heat_kernel.hpp"
#include "gausslt/quadrature.hpp"
#include "gausslt/parallel.hpp"
#include "gausslt/lemma_kernels.hpp"
#include "gausslt/lemma_oracle.hpp"
#include "gausslt/lemma_verify.hpp"
#include "gausslt/field.hpp"
#include "gausslt/moments.hpp"
#include "gausslt/pathsim.hpp"
#include "gausslt/ratelab.hpp"
#include "gausslt/csv.hpp"
