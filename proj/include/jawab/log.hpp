#pragma once

#include <functional>
#include <string>

namespace jawab {

using WarnHandler = std::function<void(const std::string&)>;

// Non-fatal diagnostics (recoverable parse issues, degraded readers) go
// through a process-wide handler. Default writes "warning: ..." to stderr.
void warn(const std::string& message);

// Returns the previous handler. Passing nullptr restores the default.
WarnHandler set_warn_handler(WarnHandler handler);

} // namespace jawab
