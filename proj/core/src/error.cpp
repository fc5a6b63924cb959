#include "fiberbayes/error.hpp"

#include <atomic>
#include <iostream>

namespace fiberbayes {

namespace {
std::atomic<bool> g_warnings_enabled{true};
}

void warn(const std::string& message) {
  if (g_warnings_enabled.load()) std::cerr << "warning: " << message << '\n';
}

bool set_warnings_enabled(bool enabled) { return g_warnings_enabled.exchange(enabled); }

}  // namespace fiberbayes
