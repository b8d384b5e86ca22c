#pragma once

// Everything in one include.

#include "qres/dense_tensor.hpp"
#include "qres/dmrg.hpp"
#include "qres/errors.hpp"
#include "qres/exact_diag.hpp"
#include "qres/lanczos.hpp"
#include "qres/linalg.hpp"
#include "qres/mpo.hpp"
#include "qres/mps.hpp"
#include "qres/mps_io.hpp"
#include "qres/pauli.hpp"
#include "qres/prefix_cache.hpp"
#include "qres/prrlu.hpp"
#include "qres/resources.hpp"
#include "qres/spin_model.hpp"
#include "qres/tci.hpp"
