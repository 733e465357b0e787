#pragma once

#include "binprobe/asm_parser.hpp"
#include "binprobe/chat_endpoint.hpp"
#include "binprobe/contrastive.hpp"
#include "binprobe/corpus.hpp"
#include "binprobe/depgraph.hpp"
#include "binprobe/dual_trainer.hpp"
#include "binprobe/encoder.hpp"
#include "binprobe/errors.hpp"
#include "binprobe/experiment.hpp"
#include "binprobe/featurizer.hpp"
#include "binprobe/gen_endpoint.hpp"
#include "binprobe/hash.hpp"
#include "binprobe/judge.hpp"
#include "binprobe/metrics.hpp"
#include "binprobe/mlp.hpp"
#include "binprobe/nucleus.hpp"
#include "binprobe/prober.hpp"
#include "binprobe/prompts.hpp"
#include "binprobe/recoverer.hpp"
#include "binprobe/report.hpp"
#include "binprobe/response_cache.hpp"
#include "binprobe/scorer.hpp"
#include "binprobe/signature.hpp"
#include "binprobe/spearman.hpp"
#include "binprobe/strutil.hpp"
#include "binprobe/synthetic.hpp"
#include "binprobe/vector_index.hpp"
#include "binprobe/wire.hpp"
