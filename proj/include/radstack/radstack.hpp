#pragma once

// Umbrella header for the radstack toolkit: multiregional radiomics feature
// extraction from 3D multi-parametric volumes, rater-agreement stability
// filtering, feature selection, forest ensembles, STAPLE label fusion, and
// the evaluation stack.

#include "radstack/common.hpp"
#include "radstack/descriptors.hpp"
#include "radstack/ensemble.hpp"
#include "radstack/extract.hpp"
#include "radstack/filters.hpp"
#include "radstack/firstorder.hpp"
#include "radstack/forest.hpp"
#include "radstack/manifest.hpp"
#include "radstack/matrix.hpp"
#include "radstack/metrics.hpp"
#include "radstack/pipeline.hpp"
#include "radstack/segmetrics.hpp"
#include "radstack/selection.hpp"
#include "radstack/shape.hpp"
#include "radstack/smote.hpp"
#include "radstack/stability.hpp"
#include "radstack/staple.hpp"
#include "radstack/svm.hpp"
#include "radstack/synthetic.hpp"
#include "radstack/tableprep.hpp"
#include "radstack/texture.hpp"
#include "radstack/volume.hpp"
