#pragma once

// Convenience umbrella: pulls in the whole toolkit.  Individual headers are
// self-contained; include them directly when build time matters.

#include "basis.hpp"
#include "bench.hpp"
#include "circuit.hpp"
#include "compiler.hpp"
#include "dag.hpp"
#include "decompose.hpp"
#include "draw.hpp"
#include "error.hpp"
#include "euler.hpp"
#include "export.hpp"
#include "fusion.hpp"
#include "gates.hpp"
#include "ir.hpp"
#include "linalg.hpp"
#include "mapping.hpp"
#include "noise.hpp"
#include "pathsum.hpp"
#include "pauli.hpp"
#include "peephole.hpp"
#include "rng.hpp"
#include "simulator.hpp"
#include "statevector.hpp"
#include "topology.hpp"
#include "variational.hpp"
