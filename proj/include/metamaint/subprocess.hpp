#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace metamaint {

struct ProcessResult {
    int exit_code = 0;
    std::string out;
    std::string err;
};

/// Runs argv[0] (looked up on PATH) with the given stdin bytes, collecting
/// stdout and stderr. Input is written while output is drained, so
/// arbitrarily large batch requests cannot deadlock on full pipes.
/// Throws std::system_error if the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv,
                          std::string_view input = {},
                          const std::filesystem::path& cwd = {});

} // namespace metamaint
