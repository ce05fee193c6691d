#include "msd/log.hpp"

#include <cstdlib>
#include <mutex>

#include <spdlog/sinks/stdout_sinks.h>

namespace msd {

std::shared_ptr<spdlog::logger> logger() {
  static std::once_flag once;
  static std::shared_ptr<spdlog::logger> instance;
  std::call_once(once, [] {
    instance = std::make_shared<spdlog::logger>("msd", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    instance->set_pattern("[%l] %v");
    instance->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("MSD_LOG")) instance->set_level(spdlog::level::from_str(env));
  });
  return instance;
}

}  // namespace msd
