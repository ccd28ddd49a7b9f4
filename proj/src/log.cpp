#include "fbmflow/log.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace fbmflow {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

std::function<void(std::string_view)>& sink() {
  static std::function<void(std::string_view)> s = [](std::string_view msg) {
    std::cerr << "warning: " << msg << "\n";
  };
  return s;
}

}  // namespace

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(message);
}

std::function<void(std::string_view)> set_warning_sink(std::function<void(std::string_view)> s) {
  std::lock_guard lock(sink_mutex());
  auto old = std::move(sink());
  sink() = std::move(s);
  return old;
}

}  // namespace fbmflow
