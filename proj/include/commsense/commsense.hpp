#pragma once

// Umbrella header: the whole passive crowd-sensing toolkit.

#include "commsense/category.hpp"
#include "commsense/cell.hpp"
#include "commsense/crs.hpp"
#include "commsense/csi.hpp"
#include "commsense/dataset.hpp"
#include "commsense/detector.hpp"
#include "commsense/error.hpp"
#include "commsense/experiment.hpp"
#include "commsense/fft.hpp"
#include "commsense/iq.hpp"
#include "commsense/knn.hpp"
#include "commsense/ofdm.hpp"
#include "commsense/parallel.hpp"
#include "commsense/pca.hpp"
#include "commsense/pss.hpp"
#include "commsense/rng.hpp"
#include "commsense/scenario.hpp"
#include "commsense/svg.hpp"
