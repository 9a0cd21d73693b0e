#pragma once

#include "equicalib/bounds.hpp"
#include "equicalib/dataset.hpp"
#include "equicalib/dataset_io.hpp"
#include "equicalib/error.hpp"
#include "equicalib/evidential.hpp"
#include "equicalib/experiments.hpp"
#include "equicalib/generators.hpp"
#include "equicalib/group.hpp"
#include "equicalib/metrics.hpp"
#include "equicalib/models.hpp"
#include "equicalib/nn.hpp"
#include "equicalib/numeric.hpp"
#include "equicalib/orbits.hpp"
#include "equicalib/parallel.hpp"
#include "equicalib/report.hpp"
#include "equicalib/rng.hpp"
#include "equicalib/symmetry.hpp"
#include "equicalib/worked_examples.hpp"
