#pragma once

#include "z2z/bench.hpp"
#include "z2z/codebook.hpp"
#include "z2z/codebook_io.hpp"
#include "z2z/corpus_io.hpp"
#include "z2z/error.hpp"
#include "z2z/hyper_embedding.hpp"
#include "z2z/lzw.hpp"
#include "z2z/metrics.hpp"
#include "z2z/mock_loop.hpp"
#include "z2z/report.hpp"
#include "z2z/session.hpp"
#include "z2z/types.hpp"
#include "z2z/visualize.hpp"
