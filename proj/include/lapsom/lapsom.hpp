// Umbrella header.
#ifndef LAPSOM_LAPSOM_HPP
#define LAPSOM_LAPSOM_HPP

#include "lapsom/communities.hpp"
#include "lapsom/diagnostics.hpp"
#include "lapsom/dot.hpp"
#include "lapsom/error.hpp"
#include "lapsom/graph.hpp"
#include "lapsom/ingest.hpp"
#include "lapsom/kernel.hpp"
#include "lapsom/metrics.hpp"
#include "lapsom/parallel.hpp"
#include "lapsom/serialize.hpp"
#include "lapsom/som.hpp"
#include "lapsom/spectral.hpp"

#endif
