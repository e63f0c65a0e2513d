#pragma once

// Diagnostic logging gated by the TALSEG_LOG environment variable
// (error|warn|info|debug, default warn). Messages go to stderr so data
// outputs on stdout stay clean.

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace talseg::log {

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

inline Level level_from_env() {
    const char* raw = std::getenv("TALSEG_LOG");
    if (raw == nullptr) return Level::kWarn;
    std::string_view v{raw};
    if (v == "error" || v == "0") return Level::kError;
    if (v == "warn" || v == "1") return Level::kWarn;
    if (v == "info" || v == "2") return Level::kInfo;
    if (v == "debug" || v == "3") return Level::kDebug;
    return Level::kWarn;
}

inline Level threshold() {
    static const Level lvl = level_from_env();
    return lvl;
}

inline bool enabled(Level lvl) {
    return static_cast<int>(lvl) <= static_cast<int>(threshold());
}

inline void write(Level lvl, std::string_view msg) {
    if (!enabled(lvl)) return;
    static std::mutex mu;
    const char* tag = lvl == Level::kError  ? "error"
                      : lvl == Level::kWarn ? "warn"
                      : lvl == Level::kInfo ? "info"
                                            : "debug";
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "talseg: " << tag << ": " << msg << '\n';
}

inline void error(std::string_view msg) { write(Level::kError, msg); }
inline void warn(std::string_view msg) { write(Level::kWarn, msg); }
inline void info(std::string_view msg) { write(Level::kInfo, msg); }
inline void debug(std::string_view msg) { write(Level::kDebug, msg); }

}  // namespace talseg::log
