#pragma once

#include "llmjoin/errors.hpp"
#include "llmjoin/tokenizer.hpp"
#include "llmjoin/table.hpp"
#include "llmjoin/table_jsonl.hpp"
#include "llmjoin/cost_params.hpp"
#include "llmjoin/cost_model.hpp"
#include "llmjoin/optimizer.hpp"
#include "llmjoin/prompts.hpp"
#include "llmjoin/backend.hpp"
#include "llmjoin/simulated.hpp"
#include "llmjoin/http_backend.hpp"
#include "llmjoin/record_replay.hpp"
#include "llmjoin/join.hpp"
#include "llmjoin/sweep.hpp"
#include "llmjoin/bench.hpp"
