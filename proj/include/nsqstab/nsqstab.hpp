#pragma once

// Umbrella header: stability-type certificates for block-structured
// non-square real matrices.

#include "nsqstab/block.hpp"
#include "nsqstab/conjecture.hpp"
#include "nsqstab/diag_lyapunov.hpp"
#include "nsqstab/dominance.hpp"
#include "nsqstab/dus.hpp"
#include "nsqstab/gamma.hpp"
#include "nsqstab/io.hpp"
#include "nsqstab/linalg.hpp"
#include "nsqstab/version.hpp"
