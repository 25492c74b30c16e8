#include "jawab/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace jawab {

namespace {

std::mutex g_mutex;
WarnHandler g_handler;

void default_handler(const std::string& message) {
    std::cerr << "warning: " << message << "\n";
}

} // namespace

void warn(const std::string& message) {
    WarnHandler h;
    {
        std::lock_guard<std::mutex> lock(g_mutex);
        h = g_handler;
    }
    if (h) {
        h(message);
    } else {
        std::lock_guard<std::mutex> lock(g_mutex);
        default_handler(message);
    }
}

WarnHandler set_warn_handler(WarnHandler handler) {
    std::lock_guard<std::mutex> lock(g_mutex);
    WarnHandler old = std::move(g_handler);
    g_handler = std::move(handler);
    return old;
}

} // namespace jawab
