#pragma once

#include "directions.hpp"
#include "error.hpp"
#include "integrals.hpp"
#include "measures.hpp"
#include "parallel.hpp"
#include "postprocess.hpp"
#include "skeleton.hpp"
#include "synth.hpp"
#include "transform.hpp"
#include "volume.hpp"
#include "volume_io.hpp"
