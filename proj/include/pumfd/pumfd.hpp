#pragma once

#include "pumfd/errors.hpp"
#include "pumfd/kernels.hpp"
#include "pumfd/points.hpp"
#include "pumfd/covering.hpp"
#include "pumfd/linalg.hpp"
#include "pumfd/localinterp.hpp"
#include "pumfd/assembly.hpp"
#include "pumfd/pde.hpp"
#include "pumfd/stability.hpp"
#include "pumfd/experiment.hpp"
