#pragma once

#include "lsr/error.hpp"
#include "lsr/sparse_vector.hpp"
#include "lsr/vocabulary.hpp"
#include "lsr/idf.hpp"
#include "lsr/scoring.hpp"
#include "lsr/index.hpp"
#include "lsr/retrieval.hpp"
#include "lsr/distill/encoder.hpp"
#include "lsr/distill/ensemble.hpp"
#include "lsr/distill/loss.hpp"
#include "lsr/distill/mining.hpp"
#include "lsr/distill/teachers.hpp"
#include "lsr/distill/train.hpp"
#include "lsr/eval/metrics.hpp"
#include "lsr/eval/bench.hpp"
#include "lsr/fixture.hpp"
#include "lsr/io.hpp"
