#ifndef SPATIALREL_SPATIALREL_HPP
#define SPATIALREL_SPATIALREL_HPP

#include "concordance.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "graph.hpp"
#include "llm_client.hpp"
#include "pipeline.hpp"
#include "prompting.hpp"
#include "text.hpp"
#include "triples.hpp"

#endif  // SPATIALREL_SPATIALREL_HPP
