#pragma once

#include <filesystem>
#include <string>

#include <unistd.h>

namespace testutil {

/// Per-process scratch directory, created on first use.
inline std::filesystem::path scratch_dir()
{
    static const std::filesystem::path dir = [] {
        auto d = std::filesystem::temp_directory_path() / ("shapecomplete_tests_" + std::to_string(::getpid()));
        std::filesystem::create_directories(d);
        return d;
    }();
    return dir;
}

inline std::string scratch(const std::string& name)
{
    return (scratch_dir() / name).string();
}

} // namespace testutil
