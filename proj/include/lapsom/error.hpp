#ifndef LAPSOM_ERROR_HPP
#define LAPSOM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lapsom {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input (I/O, parsing). The CLI maps it to exit code 2.
class InputError : public Error
{
public:
    using Error::Error;
};

/// A module precondition does not hold for otherwise well-formed input.
/// The CLI maps it to exit code 1.
class AnalysisError : public Error
{
public:
    using Error::Error;
};

} // namespace lapsom

#endif // LAPSOM_ERROR_HPP
