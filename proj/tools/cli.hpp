#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace actdiag::cli {

/// Entry point of the `actdiag` tool. `args` excludes the program name.
/// Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Expands `--config <file>`: every `key = value` line becomes `--key value`
/// unless `--key` is already present. `#` starts a comment.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace actdiag::cli
