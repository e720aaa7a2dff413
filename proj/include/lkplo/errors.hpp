#pragma once

#include <stdexcept>
#include <string>

namespace lkplo {

// Every error carries its kind name so the CLI can report it on one line.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& m) : Error("DimensionError", m) {}
};

struct InvalidArgumentError : Error {
    explicit InvalidArgumentError(const std::string& m) : Error("InvalidArgumentError", m) {}
};

// All eigenvalues of the centered Gram matrix fell below the floor.
struct DegenerateKernelError : Error {
    explicit DegenerateKernelError(const std::string& m) : Error("DegenerateKernelError", m) {}
};

struct InvalidKError : Error {
    explicit InvalidKError(const std::string& m) : Error("InvalidKError", m) {}
};

struct DegenerateDirectionsError : Error {
    explicit DegenerateDirectionsError(const std::string& m)
        : Error("DegenerateDirectionsError", m) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error("ParseError", m) {}
};

struct StratificationError : Error {
    explicit StratificationError(const std::string& m) : Error("StratificationError", m) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& m) : Error("FormatError", m) {}
};

}  // namespace lkplo
