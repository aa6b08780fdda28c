#pragma once

#include "cpts/core.hpp"
#include "cpts/dataset.hpp"
#include "cpts/evaluation.hpp"
#include "cpts/generator.hpp"
#include "cpts/llm_client.hpp"
#include "cpts/model_params.hpp"
#include "cpts/notation.hpp"
#include "cpts/rng.hpp"
#include "cpts/semantics.hpp"
#include "cpts/sketch.hpp"
