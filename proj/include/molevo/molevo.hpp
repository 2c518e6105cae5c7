#pragma once

/// @file molevo.hpp
/// @brief Convenience header pulling in the whole library.

#include "molevo/alerts.hpp"
#include "molevo/canonical.hpp"
#include "molevo/descriptors.hpp"
#include "molevo/element.hpp"
#include "molevo/error.hpp"
#include "molevo/evolution.hpp"
#include "molevo/fragments.hpp"
#include "molevo/harness.hpp"
#include "molevo/log.hpp"
#include "molevo/metrics.hpp"
#include "molevo/moea.hpp"
#include "molevo/molgraph.hpp"
#include "molevo/scorer.hpp"
#include "molevo/selfies.hpp"
#include "molevo/smiles.hpp"
#include "molevo/substructure.hpp"
#include "molevo/validate.hpp"
