#pragma once

#include "rtransfer/attack.hpp"
#include "rtransfer/corpus.hpp"
#include "rtransfer/embedding.hpp"
#include "rtransfer/error.hpp"
#include "rtransfer/io.hpp"
#include "rtransfer/metrics.hpp"
#include "rtransfer/pca.hpp"
#include "rtransfer/process.hpp"
#include "rtransfer/protocol.hpp"
#include "rtransfer/report.hpp"
#include "rtransfer/rng.hpp"
#include "rtransfer/unicode.hpp"

namespace rtransfer {
inline constexpr const char* kVersion = "0.1.0";
}
