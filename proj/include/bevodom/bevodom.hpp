#pragma once

#include "bevodom/bev_flow.hpp"
#include "bevodom/correlation.hpp"
#include "bevodom/errors.hpp"
#include "bevodom/evaluation.hpp"
#include "bevodom/geometry.hpp"
#include "bevodom/losses.hpp"
#include "bevodom/lss_projection.hpp"
#include "bevodom/sampler.hpp"
#include "bevodom/tensor.hpp"
#include "bevodom/trajectory.hpp"
#include "bevodom/io/association.hpp"
#include "bevodom/io/bvt1.hpp"
#include "bevodom/io/config.hpp"
#include "bevodom/io/synth.hpp"
#include "bevodom/io/trajectory_formats.hpp"
