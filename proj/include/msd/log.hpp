#ifndef MSD_LOG_HPP
#define MSD_LOG_HPP

#include <memory>

#include <spdlog/spdlog.h>

namespace msd {

// Shared stderr logger. The level comes from MSD_LOG (trace, debug, info,
// warn, error, off); default is warn.
std::shared_ptr<spdlog::logger> logger();

}  // namespace msd

#endif  // MSD_LOG_HPP
