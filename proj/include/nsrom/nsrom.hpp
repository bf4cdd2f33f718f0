#pragma once

#include "nsrom/config.hpp"
#include "nsrom/diagnostics.hpp"
#include "nsrom/errors.hpp"
#include "nsrom/experiment.hpp"
#include "nsrom/fem/assembly.hpp"
#include "nsrom/fem/constraints.hpp"
#include "nsrom/fem/forms.hpp"
#include "nsrom/fem/space.hpp"
#include "nsrom/fom.hpp"
#include "nsrom/io/archive.hpp"
#include "nsrom/io/csv.hpp"
#include "nsrom/io/vtk.hpp"
#include "nsrom/mesh.hpp"
#include "nsrom/numerics/dense.hpp"
#include "nsrom/numerics/quadrature.hpp"
#include "nsrom/numerics/sparse.hpp"
#include "nsrom/numerics/vector.hpp"
#include "nsrom/pod.hpp"
#include "nsrom/problems.hpp"
#include "nsrom/rom.hpp"
#include "nsrom/snapshots.hpp"
#include "nsrom/verify.hpp"
