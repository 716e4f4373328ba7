#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace siso {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two spatial inputs that must share a frame grid do not.
class DimensionMismatch : public Error {
public:
    DimensionMismatch(int w1, int h1, int w2, int h2)
        : Error("dimension mismatch: " + std::to_string(w1) + "x" + std::to_string(h1) +
                " vs " + std::to_string(w2) + "x" + std::to_string(h2)) {}
};

/// Malformed on-disk data. `where` names the file and the location inside it
/// (byte offset, frame index, ...).
class FormatError : public Error {
public:
    FormatError(const std::string& where, const std::string& what)
        : Error(where + ": " + what), where_(where) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

class IoError : public Error {
public:
    IoError(const std::filesystem::path& path, const std::string& what)
        : Error(path.string() + ": " + what), path_(path) {}

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Up-front validation of a whole input set failed; carries every problem found.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> problems)
        : Error(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p) {
        std::string out = std::to_string(p.size()) + " validation problem(s)";
        for (const auto& s : p) out += "\n  " + s;
        return out;
    }

    std::vector<std::string> problems_;
};

}  // namespace siso
