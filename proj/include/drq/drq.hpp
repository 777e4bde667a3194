#ifndef DRQ_DRQ_HPP
#define DRQ_DRQ_HPP

// Convenience header pulling in the whole toolkit.

#include "drq/adrscore.hpp"
#include "drq/augment.hpp"
#include "drq/caption_metrics.hpp"
#include "drq/chain.hpp"
#include "drq/config.hpp"
#include "drq/embedder.hpp"
#include "drq/error.hpp"
#include "drq/geometry.hpp"
#include "drq/qa_gen.hpp"
#include "drq/remote_provider.hpp"
#include "drq/runner.hpp"
#include "drq/scene.hpp"
#include "drq/templates.hpp"
#include "drq/util.hpp"
#include "drq/visual_metrics.hpp"

#endif  // DRQ_DRQ_HPP
