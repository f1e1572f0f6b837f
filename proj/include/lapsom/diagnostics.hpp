#ifndef LAPSOM_DIAGNOSTICS_HPP
#define LAPSOM_DIAGNOSTICS_HPP

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <utility>

namespace lapsom::diag {

using Sink = std::function<void(const std::string&)>;

namespace detail {
inline Sink& sink()
{
    static Sink s = [](const std::string& msg) { std::cerr << "lapsom: " << msg << '\n'; };
    return s;
}
inline std::mutex& sink_mutex()
{
    static std::mutex m;
    return m;
}
} // namespace detail

/// Replaces the warning sink and returns the previous one.
inline Sink set_sink(Sink s)
{
    std::lock_guard lock(detail::sink_mutex());
    return std::exchange(detail::sink(), std::move(s));
}

inline void warn(const std::string& msg)
{
    std::lock_guard lock(detail::sink_mutex());
    if (detail::sink())
        detail::sink()(msg);
}

/// Installs a sink for the lifetime of the guard.
class ScopedSink
{
public:
    explicit ScopedSink(Sink s) : previous_(set_sink(std::move(s))) {}
    ~ScopedSink() { set_sink(std::move(previous_)); }
    ScopedSink(const ScopedSink&) = delete;
    ScopedSink& operator=(const ScopedSink&) = delete;

private:
    Sink previous_;
};

} // namespace lapsom::diag

#endif // LAPSOM_DIAGNOSTICS_HPP
