#include "phd/log.hpp"

#include <iostream>
#include <utility>

namespace phd::log {
namespace {

Sink& current_sink() {
  static Sink sink = [](const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return sink;
}

}  // namespace

Sink set_warning_sink(Sink sink) {
  return std::exchange(current_sink(), std::move(sink));
}

void warn(const std::string& message) {
  if (current_sink()) current_sink()(message);
}

}  // namespace phd::log
